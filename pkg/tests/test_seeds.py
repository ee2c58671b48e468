from __future__ import annotations

import pytest

from taxoforge.errors import (
    DuplicateSeedEntry,
    InvalidArgument,
    InvalidClustering,
    InvalidQid,
    ParseError,
)
from taxoforge.seeds import generic_head, parse_seed

from conftest import make_seed


def write_seed(tmp_path, rows, header="label,qid,cluster"):
    path = tmp_path / "seed.csv"
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


class TestParseSeed:
    def test_accepts_valid_row(self, tmp_path):
        path = write_seed(
            tmp_path,
            ["science,Q336,0", "machine learning,Q2539,1", "semi-supervised learning,Q1041418,1"],
        )
        seed = parse_seed(path)
        assert len(seed) == 3
        entry = seed.by_id("semi-supervised learning")
        assert entry.qid == "Q1041418" and entry.cluster == 1

    def test_malformed_qid(self, tmp_path):
        path = write_seed(tmp_path, ["x,1041418,0"])
        with pytest.raises(InvalidQid):
            parse_seed(path)

    def test_duplicate_label(self, tmp_path):
        path = write_seed(tmp_path, ["a,Q1,0", "A ,Q2,0"])
        with pytest.raises(DuplicateSeedEntry):
            parse_seed(path)

    def test_duplicate_qid(self, tmp_path):
        path = write_seed(tmp_path, ["a,Q1,0", "b,Q1,0"])
        with pytest.raises(DuplicateSeedEntry):
            parse_seed(path)

    def test_non_contiguous_clusters(self, tmp_path):
        path = write_seed(tmp_path, ["a,Q1,0", "b,Q2,2"])
        with pytest.raises(InvalidClustering):
            parse_seed(path)

    def test_clusters_must_start_at_zero(self, tmp_path):
        path = write_seed(tmp_path, ["a,Q1,1", "b,Q2,2"])
        with pytest.raises(InvalidClustering):
            parse_seed(path)

    def test_wrong_header(self, tmp_path):
        path = write_seed(tmp_path, ["a,Q1,0"], header="term,qid,rank")
        with pytest.raises(ParseError):
            parse_seed(path)

    def test_full_seed_fixture_has_301_entries(self, fixtures_dir):
        seed = parse_seed(fixtures_dir / "seed_full.csv")
        assert len(seed) == 301
        assert seed.by_id("semi-supervised learning").qid == "Q1041418"
        assert seed.by_id("science").cluster == 0
        cnn = seed.by_id("convolutional neural network")
        assert cnn.cluster == seed.cluster_count() - 1

    def test_parse_is_pure(self, fixtures_dir):
        a = parse_seed(fixtures_dir / "seed_full.csv")
        b = parse_seed(fixtures_dir / "seed_full.csv")
        assert a == b


class TestGenericHead:
    def setup_method(self):
        self.seed = make_seed(
            [
                ("science", "Q336", 0),
                ("art", "Q735", 0),
                ("computing", "Q91", 1),
                ("machine learning", "Q2539", 2),
                ("convolutional neural network", "Q17084460", 2),
            ]
        )

    def test_single_cluster(self):
        assert generic_head(self.seed, 1) == {"science", "art"}

    def test_all_clusters_is_whole_seed(self):
        assert generic_head(self.seed, 3) == self.seed.ids

    def test_out_of_range(self):
        with pytest.raises(InvalidArgument):
            generic_head(self.seed, 0)
        with pytest.raises(InvalidArgument):
            generic_head(self.seed, 4)

    def test_monotone_in_cluster_count(self):
        for a in range(1, 4):
            for b in range(a, 4):
                assert generic_head(self.seed, a) <= generic_head(self.seed, b)

    def test_most_generic_cluster_only(self, fixtures_dir):
        seed = parse_seed(fixtures_dir / "seed_full.csv")
        head = generic_head(seed, 1)
        assert "science" in head
        assert "convolutional neural network" not in head
