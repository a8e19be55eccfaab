import json

import numpy as np
import pytest

from wordfusion import conceptnet
from wordfusion.conceptnet import (
    ConceptEdge,
    DumpParseError,
    build_term_index,
    fetch_neighbors_http,
    neighbors,
    normalize_term,
    parse_dump,
)
from wordfusion.errors import FetchError, FormatError


def dump_line(rel, start, end, weight, meta=None):
    if meta is None:
        meta = json.dumps({"weight": weight})
    return f"/a/[/r/{rel}/,{start}/,{end}/]\t/r/{rel}\t{start}\t{end}\t{meta}"


class TestNormalizeTerm:
    def test_spaces_become_underscores(self):
        assert normalize_term("New York") == "new_york"

    def test_lowercases(self):
        assert normalize_term("Dog") == "dog"

    def test_strips_surrounding_whitespace(self):
        assert normalize_term(" cat ") == "cat"

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            normalize_term("")
        with pytest.raises(ValueError):
            normalize_term("   ")


class TestConceptEdge:
    def test_validates_fields(self):
        with pytest.raises(ValueError):
            ConceptEdge("RelatedTo", "", "puppy", 1.0)
        with pytest.raises(ValueError):
            ConceptEdge("", "dog", "puppy", 1.0)
        with pytest.raises(ValueError):
            ConceptEdge("RelatedTo", "dog", "puppy", -0.1)


class TestParseDump:
    def test_conforming_line(self):
        line = dump_line("RelatedTo", "/c/en/dog", "/c/en/puppy", 2.0)
        [edge] = list(parse_dump([line]))
        assert edge == ConceptEdge("RelatedTo", "dog", "puppy", 2.0)

    def test_non_english_endpoint_skipped_silently(self):
        errors: list[DumpParseError] = []
        line = dump_line("RelatedTo", "/c/fr/chien", "/c/en/dog", 1.0)
        assert list(parse_dump([line], errors=errors)) == []
        assert errors == []

    def test_malformed_json_recorded_and_stream_continues(self):
        errors: list[DumpParseError] = []
        lines = [
            dump_line("RelatedTo", "/c/en/dog", "/c/en/puppy", 0, meta="{not json"),
            dump_line("IsA", "/c/en/dog", "/c/en/canine", 1.5),
        ]
        edges = list(parse_dump(lines, errors=errors))
        assert [e.end_term for e in edges] == ["canine"]
        assert [err.line_no for err in errors] == [1]

    def test_bad_arity_recorded(self):
        errors: list[DumpParseError] = []
        assert list(parse_dump(["only\tthree\tfields"], errors=errors)) == []
        assert errors[0].line_no == 1
        assert "5" in errors[0].reason

    def test_bad_weights_recorded(self):
        errors: list[DumpParseError] = []
        lines = [
            dump_line("RelatedTo", "/c/en/a", "/c/en/b", 0, meta='{"weight": -1}'),
            dump_line("RelatedTo", "/c/en/a", "/c/en/b", 0, meta='{"weight": true}'),
            dump_line("RelatedTo", "/c/en/a", "/c/en/b", 0, meta='{"weight": "2"}'),
            dump_line("RelatedTo", "/c/en/a", "/c/en/b", 0, meta='{"nope": 1}'),
        ]
        assert list(parse_dump(lines, errors=errors)) == []
        assert len(errors) == 4

    def test_sense_tagged_uris(self):
        line = dump_line("IsA", "/c/en/dog/n", "/c/en/canine/n/wn", 1.5)
        [edge] = list(parse_dump([line]))
        assert (edge.start_term, edge.end_term) == ("dog", "canine")

    def test_relation_subpath_kept(self):
        line = dump_line("dbpedia/genre", "/c/en/a", "/c/en/b", 1.0)
        [edge] = list(parse_dump([line]))
        assert edge.relation == "dbpedia/genre"

    def test_bad_uris_recorded(self):
        errors: list[DumpParseError] = []
        lines = [
            dump_line("RelatedTo", "/x/en/dog", "/c/en/puppy", 1.0),
            f"/a/x\t/x/RelatedTo\t/c/en/dog\t/c/en/puppy\t{json.dumps({'weight': 1.0})}",
        ]
        assert list(parse_dump(lines, errors=errors)) == []
        assert len(errors) == 2

    def test_blank_lines_skipped(self):
        assert list(parse_dump(["", "\n"])) == []

    def test_fixture_parses_clean(self, dump_path):
        errors: list[DumpParseError] = []
        with open(dump_path, encoding="utf-8") as fh:
            edges = list(parse_dump(fh, errors=errors))
        assert errors == []
        assert len(edges) == 86  # hand count: 89 lines, 3 non-English
        assert ConceptEdge("RelatedTo", "dog", "puppy", 2.0) in edges
        assert ConceptEdge("Synonym", "dog", "puppy", 2.0) in edges
        assert ConceptEdge("IsA", "dog", "canine", 1.5) in edges


FIXTURE_EDGES = [
    ConceptEdge("RelatedTo", "dog", "puppy", 2.0),
    ConceptEdge("IsA", "dog", "animal", 3.0),
]


class TestNeighbors:
    def test_sorted_by_descending_weight(self):
        ns = neighbors("dog", FIXTURE_EDGES)
        assert [(n.term, n.weight) for n in ns.neighbors] == [("animal", 3.0), ("puppy", 2.0)]

    def test_cap_truncates(self):
        ns = neighbors("dog", FIXTURE_EDGES, cap=1)
        assert ns.terms == ("animal",)

    def test_cap_prefix_property(self):
        rng = np.random.default_rng(42)
        edges = [
            ConceptEdge("RelatedTo", "hub", f"t{i:02d}", float(rng.integers(1, 100)))
            for i in range(30)
        ]
        by_cap = {cap: neighbors("hub", edges, cap=cap).terms for cap in (3, 10, 30)}
        assert by_cap[3] == by_cap[10][:3]
        assert by_cap[10] == by_cap[30][:10]

    def test_unknown_word_empty(self):
        ns = neighbors("zzz", FIXTURE_EDGES)
        assert len(ns) == 0

    def test_both_directions_count(self):
        edges = [ConceptEdge("RelatedTo", "puppy", "dog", 2.0)]
        assert neighbors("dog", edges).terms == ("puppy",)

    def test_self_loop_excluded(self):
        edges = [ConceptEdge("RelatedTo", "dog", "dog", 9.0)] + FIXTURE_EDGES
        assert "dog" not in neighbors("dog", edges).terms

    def test_dedupe_keeps_max_weight(self):
        edges = [
            ConceptEdge("RelatedTo", "dog", "puppy", 1.0),
            ConceptEdge("Synonym", "dog", "puppy", 2.5),
        ]
        [nb] = neighbors("dog", edges).neighbors
        assert (nb.relation, nb.weight) == ("Synonym", 2.5)

    def test_weight_tie_keeps_smallest_relation(self):
        edges = [
            ConceptEdge("Synonym", "dog", "puppy", 2.0),
            ConceptEdge("RelatedTo", "dog", "puppy", 2.0),
        ]
        [nb] = neighbors("dog", edges).neighbors
        assert nb.relation == "RelatedTo"

    def test_independent_of_edge_order(self):
        rng = np.random.default_rng(42)
        edges = [
            ConceptEdge("RelatedTo", "hub", f"t{i}", float(w))
            for i, w in enumerate(rng.integers(1, 5, size=20))
        ]
        baseline = neighbors("hub", edges, cap=10)
        for _ in range(5):
            shuffled = [edges[i] for i in rng.permutation(len(edges))]
            assert neighbors("hub", shuffled, cap=10) == baseline

    def test_relation_filter(self):
        ns = neighbors("dog", FIXTURE_EDGES, relation_filter={"IsA"})
        assert ns.terms == ("animal",)

    def test_weight_ties_sort_by_term(self):
        edges = [
            ConceptEdge("RelatedTo", "hub", "beta", 1.0),
            ConceptEdge("RelatedTo", "hub", "alpha", 1.0),
        ]
        assert neighbors("hub", edges).terms == ("alpha", "beta")

    def test_bad_cap(self):
        with pytest.raises(ValueError):
            neighbors("dog", FIXTURE_EDGES, cap=0)

    def test_fixture_dog_hand_count(self, dump_path):
        with open(dump_path, encoding="utf-8") as fh:
            index = build_term_index(parse_dump(fh))
        ns = neighbors("dog", index["dog"])
        assert [(n.term, n.relation, n.weight) for n in ns.neighbors] == [
            ("puppy", "RelatedTo", 2.0),
            ("canine", "IsA", 1.5),
        ]


class TestBuildTermIndex:
    def test_groups_by_both_endpoints(self):
        index = build_term_index(FIXTURE_EDGES)
        assert set(index) == {"dog", "puppy", "animal"}
        assert len(index["dog"]) == 2

    def test_self_loop_indexed_once(self):
        index = build_term_index([ConceptEdge("RelatedTo", "dog", "dog", 1.0)])
        assert len(index["dog"]) == 1


class _FakeResponse:
    def __init__(self, status_code, text):
        self.status_code = status_code
        self.text = text


class TestFetchNeighborsHttp:
    ENDPOINT = "http://127.0.0.1:1"  # never reachable; cache must cover everything

    def test_warm_cache_needs_no_network(self, api_cache_dir):
        ns = fetch_neighbors_http("dog", cache_dir=api_cache_dir, endpoint=self.ENDPOINT)
        assert [(n.term, n.weight) for n in ns.neighbors] == [("puppy", 2.0), ("canine", 1.5)]

    def test_non_english_api_edges_dropped(self, api_cache_dir):
        # dog.json carries 3 edges; the fr one must not surface
        ns = fetch_neighbors_http("dog", cache_dir=api_cache_dir, endpoint=self.ENDPOINT)
        assert len(ns) == 2

    def test_term_normalized_for_cache_key(self, api_cache_dir):
        ns = fetch_neighbors_http("Dog", cache_dir=api_cache_dir, endpoint=self.ENDPOINT)
        assert ns.word == "dog"
        assert len(ns) == 2

    def test_cold_cache_network_failure(self, tmp_path):
        with pytest.raises(FetchError, match="empty cache"):
            fetch_neighbors_http("dog", cache_dir=tmp_path, endpoint=self.ENDPOINT, timeout=0.2, min_interval=0.0)

    def test_fetch_writes_cache_then_reuses_it(self, tmp_path, monkeypatch):
        body = json.dumps({
            "edges": [
                {
                    "start": {"label": "dog", "language": "en"},
                    "end": {"label": "hot dog", "language": "en"},
                    "rel": {"label": "RelatedTo"},
                    "weight": 0.5,
                }
            ]
        })
        calls = []

        def fake_get(url, timeout):
            calls.append(url)
            return _FakeResponse(200, body)

        monkeypatch.setattr(conceptnet.requests, "get", fake_get)
        ns = fetch_neighbors_http("dog", cache_dir=tmp_path, endpoint="http://x", cap=7, min_interval=0.0)
        assert ns.terms == ("hot_dog",)
        assert calls == ["http://x/c/en/dog?limit=7"]
        assert (tmp_path / "dog.json").read_text(encoding="utf-8") == body

        monkeypatch.setattr(conceptnet.requests, "get", None)  # cache hit must not call it
        again = fetch_neighbors_http("dog", cache_dir=tmp_path, endpoint="http://x", cap=7)
        assert again == ns

    def test_http_error_status(self, tmp_path, monkeypatch):
        monkeypatch.setattr(conceptnet.requests, "get", lambda url, timeout: _FakeResponse(503, "busy"))
        with pytest.raises(FetchError, match="503"):
            fetch_neighbors_http("dog", cache_dir=tmp_path, endpoint="http://x", min_interval=0.0)

    def test_malformed_cached_json(self, tmp_path):
        (tmp_path / "dog.json").write_text("{broken", encoding="utf-8")
        with pytest.raises(FormatError):
            fetch_neighbors_http("dog", cache_dir=tmp_path, endpoint=self.ENDPOINT)

    def test_empty_edges_array(self, tmp_path):
        (tmp_path / "dog.json").write_text('{"edges": []}', encoding="utf-8")
        ns = fetch_neighbors_http("dog", cache_dir=tmp_path, endpoint=self.ENDPOINT)
        assert len(ns) == 0
