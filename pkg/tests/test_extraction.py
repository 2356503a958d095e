import re

import pytest
from hypothesis import given, strategies as st

from causematch.errors import EmptyDocument
from causematch.extraction import (
    Gazetteer,
    RawPage,
    extract_article,
    extract_locations,
    tokenize,
)

from genutil import article_html


def test_single_paragraph_document():
    page = RawPage("https://ex.com/x", "<html><body><p>Hello world.</p></body></html>")
    article = extract_article(page)
    assert article.body_text == "Hello world."
    assert article.word_count == 2
    assert article.tokens == ["hello", "world"]


def test_boilerplate_removed_from_link_bars():
    words = " ".join(f"word{i}" for i in range(300))
    nav = "".join(f'<a href="/{i}">NavItem{i}</a>' for i in range(12))
    footer = "".join(f'<a href="/f{i}">FootItem{i}</a>' for i in range(20))
    html = (
        "<html><head><title>T</title></head><body>"
        f"<nav>{nav}</nav><div><p>{words}</p></div><footer>{footer}</footer>"
        "</body></html>"
    )
    article = extract_article(RawPage("https://ex.com/story", html))
    assert "navitem" not in article.body_text.lower()
    assert "footitem" not in article.body_text.lower()
    assert article.word_count == 300


def test_adjacent_paragraphs_all_kept():
    paragraphs = "".join(f"<p>sentence number {i} with several more words</p>" for i in range(6))
    html = f"<html><body><nav><a href='/'>Home</a></nav>{paragraphs}</body></html>"
    article = extract_article(RawPage("https://ex.com/a", html))
    for i in range(6):
        assert f"sentence number {i}" in article.body_text


def test_empty_body_raises():
    with pytest.raises(EmptyDocument):
        extract_article(RawPage("https://ex.com/e", "<html><body></body></html>"))


def test_pure_link_page_raises():
    html = "<html><body><nav>" + "".join(f'<a href="/{i}">x{i}</a>' for i in range(30)) + "</nav></body></html>"
    with pytest.raises(EmptyDocument):
        extract_article(RawPage("https://ex.com/links", html))


def test_no_markup_in_extracted_text():
    html = article_html(["some text <b>bold</b> words here in the story body"] * 5)
    article = extract_article(RawPage("https://ex.com/m", html))
    assert not re.search(r"<[a-zA-Z/][^>]*>", article.body_text)


def test_title_falls_back_to_h1():
    html = "<html><body><h1>Headline Here</h1><p>body words enough to score</p></body></html>"
    assert extract_article(RawPage("https://ex.com/t", html)).title == "Headline Here"


def test_meta_tags_and_url_segments():
    html = article_html(
        ["plenty of words in the body of this story"] * 4,
        keywords=["Crime", "Chicago"],
        section="crime",
    )
    article = extract_article(RawPage("https://ex.com/crime/story-9?utm_source=x", html))
    assert article.meta_tags["keywords"] == ["Crime", "Chicago"]
    assert article.meta_tags["article:section"] == ["crime"]
    assert article.meta_tags["url_segments"] == ["crime", "story-9"]


def test_script_and_style_content_ignored():
    html = (
        "<html><body><script>var hidden = 'scriptword';</script>"
        "<style>.x{color:red}</style><p>visible words appear in the body text</p></body></html>"
    )
    article = extract_article(RawPage("https://ex.com/s", html))
    assert "scriptword" not in article.body_text
    assert "color" not in article.body_text


def test_tokenize_examples():
    assert tokenize("Gun Violence, again.") == ["gun", "violence", "again"]
    assert tokenize("") == []
    assert tokenize("café CAFÉ") == ["café", "café"]
    assert tokenize("call 911 now!") == ["call", "911", "now"]
    assert tokenize("... --- !!!") == []


@given(st.text(max_size=200))
def test_tokenize_stable_under_rejoin(text):
    tokens = tokenize(text)
    assert tokenize(" ".join(tokens)) == tokens


@pytest.fixture()
def gaz():
    return Gazetteer.from_rows(
        [
            ("Chicago", "United States", "Illinois", "Chicago"),
            ("New York City", "United States", "New York", "New York City"),
            ("York", "United Kingdom", "England", "York"),
            ("Nicaragua", "Nicaragua", "", ""),
        ]
    )


def test_extract_locations_simple(gaz):
    refs = extract_locations(tokenize("shooting on the south side of chicago"), gaz)
    assert len(refs) == 1
    assert refs[0].place_name == "Chicago"
    assert refs[0].admin_path == ["United States", "Illinois", "Chicago"]
    assert refs[0].mention_count == 1


def test_longest_match_wins(gaz):
    refs = extract_locations(tokenize("he moved to New York City last year"), gaz)
    assert [r.place_name for r in refs] == ["New York City"]


def test_mention_counts_aggregate(gaz):
    refs = extract_locations(tokenize("chicago met chicago"), gaz)
    assert refs[0].mention_count == 2


def test_mention_counts_bounded_by_tokens(gaz):
    tokens = tokenize("chicago york nicaragua chicago words chicago")
    refs = extract_locations(tokens, gaz)
    assert sum(r.mention_count for r in refs) <= len(tokens)


def test_gazetteer_load_from_tsv(tmp_path):
    path = tmp_path / "gaz.tsv"
    path.write_text("# comment\nChicago\tUnited States\tIllinois\tChicago\nZambia\tZambia\n", encoding="utf-8")
    gaz = Gazetteer.load(str(path))
    assert len(gaz) == 2
    refs = extract_locations(["zambia"], gaz)
    assert refs[0].admin_path == ["Zambia"]


def test_gazetteer_rejects_empty_admin_path(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("Nowhere\t\t\t\n", encoding="utf-8")
    with pytest.raises(ValueError, match="bad.tsv:1"):
        Gazetteer.load(str(path))
