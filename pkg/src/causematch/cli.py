"""Command-line entry points for every pipeline stage and the service.

Exit codes: 0 success, 1 operational error, 2 usage error.  Every
subcommand (except serve) writes machine-readable JSON to stdout and
diagnostics to stderr.
"""

from __future__ import annotations

import json
import random
import sys
from dataclasses import asdict

import click

from .advice import AdviceRequest, AdviceService
from .classifier import (
    evaluate as nb_evaluate,
    load_taxonomy,
    read_corpus,
    save_model_file,
    train as nb_train,
)
from .config import load_config, resolve_config_path
from .errors import CauseMatchError, EmptyClass, ValidationError, ParseError
from .extraction import Gazetteer, RawPage, extract_article, extract_locations, tokenize
from .fingerprint import hamming, simhash64


def _fail(message: str) -> None:
    click.echo(message, err=True)
    sys.exit(1)


def _emit(payload: dict) -> None:
    click.echo(json.dumps(payload, ensure_ascii=False, indent=2))


def _read_file(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        _fail(f"cannot read {path}: {exc}")
        raise  # unreachable


def _fetch_url(url: str, timeout: float = 10.0) -> str:
    import httpx

    try:
        response = httpx.get(url, timeout=timeout, follow_redirects=True)
        response.raise_for_status()
        return response.text
    except httpx.HTTPError as exc:
        _fail(f"cannot fetch {url}: {exc}")
        raise  # unreachable


@click.group()
def main() -> None:
    """causematch: article-to-cause matching pipeline tools."""


@main.command()
@click.option("--url", help="Fetch and extract this URL.")
@click.option("--file", "file_path", help="Extract from a local HTML file (fetch URL read from --fetch-url).")
@click.option("--fetch-url", default="https://example.com/article", show_default=True,
              help="URL to associate with --file input.")
@click.option("--gazetteer", "gazetteer_path", help="Gazetteer TSV for location extraction.")
def extract(url: str | None, file_path: str | None, fetch_url: str, gazetteer_path: str | None) -> None:
    """Extract a normalized article and print it as JSON."""
    if (url is None) == (file_path is None):
        raise click.UsageError("provide exactly one of --url or --file")
    if url is not None:
        html = _fetch_url(url)
        page = RawPage(url, html)
    else:
        page = RawPage(fetch_url, _read_file(file_path))
    try:
        article = extract_article(page)
        if gazetteer_path:
            article.geo_refs = extract_locations(article.tokens, Gazetteer.load(gazetteer_path))
    except CauseMatchError as exc:
        _fail(f"extraction failed: {exc}")
    payload = asdict(article)
    payload["fingerprint"] = f"{article.fingerprint:016x}"
    _emit(payload)


def _positive_alpha(ctx, param, value):
    if value <= 0:
        raise click.BadParameter("alpha must be > 0")
    return value


@main.command()
@click.option("--corpus", "corpus_path", required=True, help="Labeled corpus: <label>\\t<text> per line.")
@click.option("--taxonomy", "taxonomy_path", help="Class-id list file (defaults to the shipped 37-class taxonomy).")
@click.option("--alpha", default=1.0, show_default=True, callback=_positive_alpha, help="Laplace smoothing constant.")
@click.option("--out", "out_path", required=True, help="Where to write the model file.")
@click.option("--seed", default=42, show_default=True, help="Shuffle seed for the 80/20 split.")
@click.option("--eval-on-train", is_flag=True, help="Evaluate on the training documents instead of splitting.")
def train(corpus_path: str, taxonomy_path: str | None, alpha: float, out_path: str,
          seed: int, eval_on_train: bool) -> None:
    """Train the Naive Bayes model and print the evaluation report."""
    taxonomy = load_taxonomy(taxonomy_path)
    try:
        docs = read_corpus(corpus_path)
    except (OSError, ValueError) as exc:
        _fail(str(exc))
    if not docs:
        _fail(f"corpus {corpus_path} is empty")

    try:
        if eval_on_train:
            model = nb_train(docs, taxonomy, alpha)
            report = nb_evaluate(model, docs)
        else:
            shuffled = list(docs)
            random.Random(seed).shuffle(shuffled)
            cut = int(len(shuffled) * 0.8)
            train_docs, test_docs = shuffled[:cut], shuffled[cut:]
            if not train_docs or not test_docs:
                _fail("corpus too small for an 80/20 split; use --eval-on-train")
            report = nb_evaluate(nb_train(train_docs, taxonomy, alpha), test_docs)
            model = nb_train(docs, taxonomy, alpha)  # ship the full-corpus fit
    except EmptyClass as exc:
        _fail(str(exc))
    except CauseMatchError as exc:
        _fail(str(exc))

    save_model_file(model, out_path)
    payload = report.to_dict()
    payload["model_path"] = out_path
    payload["seed"] = seed
    _emit(payload)


@main.command()
@click.option("--url", help="Advise on this URL (fetched by the service).")
@click.option("--file", "file_path", help="Advise on a local HTML file.")
@click.option("--fetch-url", default="https://example.com/article", show_default=True)
@click.option("--publisher", required=True)
@click.option("--config", "config_path", required=True)
def advise(url: str | None, file_path: str | None, fetch_url: str, publisher: str, config_path: str) -> None:
    """Run the full pipeline for one article and print the advice JSON."""
    if (url is None) == (file_path is None):
        raise click.UsageError("provide exactly one of --url or --file")
    try:
        service = AdviceService(load_config(resolve_config_path(config_path)))
        if url is not None:
            request = AdviceRequest(url=url, publisher=publisher)
        else:
            request = AdviceRequest(url=fetch_url, publisher=publisher, html=_read_file(file_path))
        advice = service.advise(request)
    except (CauseMatchError, OSError, ValueError) as exc:
        _fail(str(exc))
    _emit(advice.to_dict())


@main.command()
@click.option("--config", "config_path", required=True)
@click.option("--listen", default="127.0.0.1:8040", show_default=True, help="host:port to bind.")
def serve(config_path: str, listen: str) -> None:
    """Run the HTTP advice service."""
    import uvicorn

    from .server import create_app

    try:
        service = AdviceService(load_config(resolve_config_path(config_path)))
    except (CauseMatchError, OSError, ValueError) as exc:
        _fail(str(exc))
    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise click.UsageError(f"--listen must be host:port, got {listen!r}")
    uvicorn.run(create_app(service), host=host, port=int(port), log_level="warning")


@main.command("rules-check")
@click.option("--rules", "rules_path", required=True, help="Rule pack to validate.")
def rules_check(rules_path: str) -> None:
    """Validate a rule file, printing every diagnostic."""
    text = _read_file(rules_path)
    try:
        from .rules import parse_rules

        ruleset = parse_rules(text)
    except ParseError as exc:
        _emit({"valid": False, "diagnostics": [{"line": exc.line, "message": exc.message}]})
        click.echo(str(exc), err=True)
        sys.exit(1)
    except ValidationError as exc:
        _emit({
            "valid": False,
            "diagnostics": [{"line": d.line, "message": d.message} for d in exc.diagnostics],
        })
        for diag in exc.diagnostics:
            click.echo(str(diag), err=True)
        sys.exit(1)
    _emit({"valid": True, "rules": len(ruleset), "diagnostics": []})


@main.command()
@click.option("--file", "files", multiple=True, help="Text file (give exactly twice).")
def simhash(files: tuple[str, ...]) -> None:
    """Fingerprint two documents and print their Hamming distance."""
    if len(files) != 2:
        raise click.UsageError("provide --file exactly twice")
    fingerprints = []
    for path in files:
        tokens = tokenize(_read_file(path))
        if not tokens:
            _fail(f"{path} contains no tokens")
        fingerprints.append(simhash64(tokens))
    _emit(
        {
            "a": {"path": files[0], "fingerprint": f"{fingerprints[0]:016x}"},
            "b": {"path": files[1], "fingerprint": f"{fingerprints[1]:016x}"},
            "hamming": hamming(fingerprints[0], fingerprints[1]),
        }
    )


if __name__ == "__main__":
    main()
