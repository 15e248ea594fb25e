from __future__ import annotations

import re

from hypothesis import given, strategies as st

from eprint_oai.authors import AuthorName, display_name, parse_authors


def test_worked_example_with_shared_affiliation():
    out = parse_authors("Fred A Bloggs, Mark Smith II (Univ A), T Sawyer (Univ B)")
    assert out == [
        AuthorName(keyname="Bloggs", forenames="Fred A", affiliation="Univ A"),
        AuthorName(keyname="Smith", forenames="Mark", suffix="II", affiliation="Univ A"),
        AuthorName(keyname="Sawyer", forenames="T", affiliation="Univ B"),
    ]


def test_single_plain_author():
    assert parse_authors("Yunping Jiang") == [
        AuthorName(keyname="Jiang", forenames="Yunping")
    ]


def test_surname_prefix():
    assert parse_authors("Ludwig von Beethoven") == [
        AuthorName(keyname="Beethoven", forenames="Ludwig", prefix="von")
    ]


def test_multi_word_prefix():
    (author,) = parse_authors("Henk van der Veen")
    assert author.prefix == "van der"
    assert author.keyname == "Veen"
    assert author.forenames == "Henk"


def test_and_separator():
    out = parse_authors("Anna N. Example and Boris Q. Sample")
    assert [a.keyname for a in out] == ["Example", "Sample"]


def test_affiliation_only_segment_applies_backward():
    out = parse_authors("A. First, B. Second, (Shared Inst)")
    assert [a.affiliation for a in out] == ["Shared Inst", "Shared Inst"]


def test_affiliation_resets_after_group():
    out = parse_authors("A. First (Inst X), B. Second, C. Third (Inst Y)")
    assert [a.affiliation for a in out] == ["Inst X", "Inst Y", "Inst Y"]


def test_degraded_output_never_raises():
    out = parse_authors("((((")
    assert len(out) == 1 and out[0].keyname == "(((("


def test_empty_line():
    assert parse_authors("") == []


def test_suffix_with_period():
    (author,) = parse_authors("Martin Luther King Jr.")
    assert author.suffix == "Jr"
    assert author.keyname == "King"


def test_display_name():
    a = AuthorName(keyname="Smith", forenames="Mark", suffix="II")
    assert display_name(a) == "Smith, Mark II"
    b = AuthorName(keyname="Beethoven", forenames="Ludwig", prefix="von")
    assert display_name(b) == "von Beethoven, Ludwig"


name_token = st.from_regex(r"[A-Z][a-z]{1,8}", fullmatch=True)
simple_names = st.builds(
    lambda first, last: f"{first} {last}", name_token, name_token
)


@given(st.lists(simple_names, min_size=1, max_size=6))
def test_no_token_loss(names):
    raw = ", ".join(names)
    parsed = parse_authors(raw)
    emitted = []
    for a in parsed:
        for part in (a.forenames, a.prefix, a.keyname, a.suffix):
            if part:
                emitted += part.split()
    source = [t for t in re.findall(r"[A-Za-z]+", raw)]
    assert emitted == source
