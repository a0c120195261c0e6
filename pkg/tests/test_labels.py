from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from maskstack import (
    Label,
    LabelConfig,
    add_label,
    config_from_dict,
    config_to_dict,
    load_config,
    remove_label,
    save_config,
)
from maskstack.errors import (
    DuplicateColor,
    DuplicateName,
    EmptyName,
    ReservedColor,
    SchemaViolation,
    UnknownLabel,
)


def build(*entries) -> LabelConfig:
    cfg = LabelConfig()
    for name, color in entries:
        cfg = add_label(cfg, name, color)
    return cfg


class TestConstruction:
    def test_empty_config_is_legal(self):
        cfg = LabelConfig()
        assert len(cfg) == 0
        assert cfg.background_index == 0

    def test_add_assigns_contiguous_indices(self):
        cfg = build(("a", (1, 2, 3)), ("b", (4, 5, 6)), ("c", (7, 8, 9)))
        assert [label.index for label in cfg] == [0, 1, 2]
        assert cfg.names == ("a", "b", "c")
        assert cfg.background_index == 3

    def test_add_is_persistent_not_mutating(self):
        cfg = build(("a", (1, 2, 3)))
        bigger = add_label(cfg, "b", (4, 5, 6))
        assert len(cfg) == 1 and len(bigger) == 2

    def test_empty_name_rejected(self):
        with pytest.raises(EmptyName):
            add_label(LabelConfig(), "", (1, 2, 3))

    def test_duplicate_name_rejected(self):
        cfg = build(("a", (1, 2, 3)))
        with pytest.raises(DuplicateName):
            add_label(cfg, "a", (9, 9, 9))

    def test_duplicate_color_rejected(self):
        cfg = build(("a", (1, 2, 3)))
        with pytest.raises(DuplicateColor):
            add_label(cfg, "b", (1, 2, 3))

    def test_black_reserved_for_background(self):
        with pytest.raises(ReservedColor):
            add_label(LabelConfig(), "void", (0, 0, 0))

    def test_color_out_of_range_rejected(self):
        with pytest.raises(SchemaViolation):
            add_label(LabelConfig(), "hot", (256, 0, 0))
        with pytest.raises(SchemaViolation):
            add_label(LabelConfig(), "cold", (-1, 0, 0))

    def test_noncontiguous_indices_rejected(self):
        with pytest.raises(SchemaViolation):
            LabelConfig((Label("a", (1, 2, 3), 1),))


class TestLookups:
    def test_get_and_contains(self):
        cfg = build(("a", (1, 2, 3)), ("b", (4, 5, 6)))
        assert cfg.get("b").color == (4, 5, 6)
        assert "a" in cfg and "zz" not in cfg
        with pytest.raises(UnknownLabel):
            cfg.get("zz")

    def test_color_of_includes_background(self):
        cfg = build(("a", (1, 2, 3)))
        assert cfg.color_of(0) == (1, 2, 3)
        assert cfg.color_of(cfg.background_index) == (0, 0, 0)
        with pytest.raises(UnknownLabel):
            cfg.color_of(5)

    def test_index_of_color(self):
        cfg = build(("a", (1, 2, 3)), ("b", (4, 5, 6)))
        assert cfg.index_of((4, 5, 6)) == 1
        assert cfg.index_of((0, 0, 0)) == cfg.background_index
        with pytest.raises(UnknownLabel):
            cfg.index_of((9, 9, 9))


class TestRemoval:
    def test_remove_reindexes_survivors(self):
        cfg = build(("a", (1, 2, 3)), ("b", (4, 5, 6)), ("c", (7, 8, 9)))
        cfg = remove_label(cfg, "b")
        assert cfg.names == ("a", "c")
        assert [label.index for label in cfg] == [0, 1]
        assert cfg.get("c").index == 1

    def test_remove_unknown(self):
        with pytest.raises(UnknownLabel):
            remove_label(build(("a", (1, 2, 3))), "b")


class TestSerialization:
    def test_dict_round_trip(self):
        cfg = build(("a", (1, 2, 3)), ("b", (4, 5, 6)))
        assert config_from_dict(config_to_dict(cfg)) == cfg

    def test_file_round_trip(self, tmp_path):
        cfg = build(("a", (10, 20, 30)))
        path = tmp_path / "config.json"
        save_config(cfg, path)
        assert load_config(path) == cfg
        data = json.loads(path.read_text())
        assert data == {"labels": [{"name": "a", "color": [10, 20, 30]}]}

    @pytest.mark.parametrize("bad", [
        [],
        {"labels": {}},
        {"labels": [{"name": "a"}]},
        {"labels": [{"color": [1, 2, 3]}]},
        {"labels": [{"name": "a", "color": [1, 2]}]},
        {"labels": [{"name": "a", "color": [1, 2, "3"]}]},
        {"labels": [{"name": "a", "color": [True, 2, 3]}]},
        {"labels": [{"name": 5, "color": [1, 2, 3]}]},
    ])
    def test_malformed_documents_rejected(self, bad):
        with pytest.raises(SchemaViolation):
            config_from_dict(bad)

    def test_unreadable_json_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json")
        with pytest.raises(SchemaViolation):
            load_config(path)

    @given(st.lists(
        st.tuples(
            st.text(min_size=1, max_size=8),
            st.tuples(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255)),
        ),
        max_size=8,
    ))
    def test_random_configs_round_trip(self, entries):
        cfg = LabelConfig()
        seen_names, seen_colors = set(), set()
        for name, color in entries:
            if name in seen_names or color in seen_colors or color == (0, 0, 0):
                continue
            seen_names.add(name)
            seen_colors.add(color)
            cfg = add_label(cfg, name, color)
        assert config_from_dict(config_to_dict(cfg)) == cfg


class TestAquaticPreset:
    """The eight-organism microscopy palette survives a file round-trip."""

    ENTRIES = [
        ("ostracod", (0, 255, 0)),
        ("rotifer", (211, 179, 145)),
        ("algae", (164, 251, 233)),
        ("diatom", (202, 215, 220)),
        ("square_algae", (230, 226, 246)),
        ("paramecium", (207, 198, 149)),
        ("vorticella", (23, 54, 255)),
        ("tardigrade", (255, 8, 8)),
    ]

    def test_round_trip_exact(self, tmp_path):
        cfg = build(*self.ENTRIES)
        path = tmp_path / "config.json"
        save_config(cfg, path)
        loaded = load_config(path)
        assert loaded == cfg
        assert [(l.name, l.color) for l in loaded] == self.ENTRIES
        assert loaded.background_index == 8
