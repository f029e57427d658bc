import pytest

from rxread.errors import EmptyInput
from rxread.uam import Status, UamString, ValidUamDb, classify, map_segments, repair


@pytest.fixture
def db():
    return ValidUamDb([("en", "aspirin"), ("en", "tablet"), ("hi", "कमल"), ("en", "Tab")])


def test_map_segments_joins_and_composes():
    u = map_segments(["cafe", "́"])
    assert u.text == "café" and u.status is Status.UNCLASSIFIED
    assert map_segments(["क", "ि"]).text == "कि"
    with pytest.raises(EmptyInput):
        map_segments([])
    with pytest.raises(EmptyInput):
        map_segments(["a", ""])


def test_uam_string_must_be_nfc():
    with pytest.raises(ValueError):
        UamString("café")


def test_classify_uses_folded_membership(db):
    assert classify(UamString("ASPIRIN"), db).status is Status.VALID
    assert classify(UamString("aspirn"), db).status is Status.INVALID
    assert classify(UamString("कमल"), db, lang="en").status is Status.INVALID
    assert classify(UamString("कमल"), db, lang="hi").status is Status.VALID


def test_repair_picks_nearest_then_shorter(db):
    r = repair(UamString("aspirn"), db)
    assert (r.text, r.status, r.original, r.distance) == ("aspirin", Status.REPAIRED, "aspirn", 1)
    # "tabt" is 1 from "tab" and 2 from "tablet"
    assert repair(UamString("tabt"), db).text == "Tab"
    assert repair(UamString("aspirin"), db).status is Status.VALID
    far = repair(UamString("zzzzzz"), db)
    assert far.status is Status.INVALID and far.text == "zzzzzz"


def test_repair_tie_breaks_lexicographically():
    db = ValidUamDb([("en", "abd"), ("en", "abc")])
    assert repair(UamString("abx"), db).text == "abc"


def test_repair_respects_language(db):
    assert repair(UamString("कमर"), db, lang="en").status is Status.INVALID
    assert repair(UamString("कमर"), db, lang="hi").text == "कमल"


def test_db_load_save_round_trip(tmp_path, db):
    db.save(tmp_path / "u.tsv")
    again = ValidUamDb.load(tmp_path / "u.tsv")
    assert again.keys() == db.keys()
    assert again.languages == ["en", "hi"]


def test_to_dict():
    r = UamString("x", Status.REPAIRED, "y", 1)
    assert r.to_dict() == {"text": "x", "status": "repaired", "original": "y", "distance": 1}
