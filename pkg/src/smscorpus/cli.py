"""Command line front end.

Output is line-oriented ``key=value`` pairs (JSON for ``stats``) so shell
pipelines can consume it.  Expected failures print ``error: <detail>`` on
stderr and exit 1.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import pipeline, release, rewards, stats, validate
from .anonymize import scrub_body
from .config import SecretConfig, load_key_file
from .errors import ConfigError, CorpusError, NotFoundError
from .models import CollectionMethod, Language, Source
from .store import DEFAULT_STORE_PATH, CorpusStore

_SOURCES = [s.value for s in Source]
_METHODS = [m.value for m in CollectionMethod]
_LANGUAGES = [l.value for l in Language]


def _fail(detail: str):
    click.echo(f"error: {detail}", err=True)
    sys.exit(1)


def catches_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CorpusError as exc:
            _fail(exc.detail)

    return wrapper


@click.group()
@click.option(
    "--store",
    "store_path",
    envvar="SMS_CORPUS_STORE",
    default=DEFAULT_STORE_PATH,
    show_default=True,
    help="Corpus store directory.",
)
@click.option(
    "--keys",
    "keys_path",
    envvar="SMS_CORPUS_KEYS",
    default=None,
    help="Key file with pseudonym_key, upload_secret and admin_token.",
)
@click.pass_context
def main(ctx: click.Context, store_path: str, keys_path: str | None):
    """Manage a growing SMS corpus: ingest, moderate, release."""
    ctx.ensure_object(dict)
    ctx.obj["store_path"] = store_path
    ctx.obj["keys_path"] = keys_path


def _open_store(ctx: click.Context) -> CorpusStore:
    return CorpusStore(ctx.obj["store_path"])


def _secrets(ctx: click.Context) -> SecretConfig:
    path = ctx.obj.get("keys_path")
    if not path:
        raise ConfigError("a key file is required (--keys or SMS_CORPUS_KEYS)")
    return load_key_file(path)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--method", type=click.Choice(_METHODS), default=None,
              help="Declared collection method; must match the payload.")
@click.option("--source", type=click.Choice(_SOURCES), required=True)
@click.option("--profile", "profile_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              default=None, help="JSON file with demographic survey answers.")
@click.option("--contributor", default=None, help="Stable contributor reference.")
@click.pass_context
@catches_errors
def ingest(ctx, file: Path, method: str | None, source: str,
           profile_path: Path | None, contributor: str | None):
    """Submit one payload file as a pending batch."""
    profile_answers = None
    if profile_path is not None:
        try:
            profile_answers = json.loads(profile_path.read_text("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            _fail(f"profile file is not valid JSON: {exc}")
        if not isinstance(profile_answers, dict):
            _fail("profile file must contain a JSON object")
    result = pipeline.submit_payload(
        _open_store(ctx),
        file.read_bytes(),
        source=Source(source),
        secrets=_secrets(ctx),
        declared_method=CollectionMethod(method) if method else None,
        profile_answers=profile_answers,
        contributor_ref=contributor,
    )
    click.echo(f"batch_id={result.batch.id}")
    click.echo(f"status={result.batch.status.value}")
    click.echo(f"messages={len(result.messages)}")
    click.echo(f"recommendation={result.report.recommendation}")
    for reason in result.report.reasons:
        click.echo(f"reason={reason}")
    for warning in result.warnings:
        click.echo(f"warning={warning}")


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@catches_errors
def scrub(file: Path):
    """Anonymize arbitrary text and print the result."""
    try:
        text = file.read_text("utf-8")
    except UnicodeDecodeError as exc:
        _fail(f"file is not valid UTF-8: {exc}")
    click.echo(scrub_body(text), nl=False)
    if not text.endswith("\n"):
        click.echo()


@main.command()
@click.argument("batch_id")
@click.pass_context
@catches_errors
def report(ctx, batch_id: str):
    """Recompute and print the screening report for a batch."""
    store = _open_store(ctx)
    batch = store.get_batch(batch_id)
    if batch is None:
        raise NotFoundError(f"batch not found: {batch_id}")
    messages = store.messages_for_batch(batch_id)
    rep = validate.quality_report(
        [m.body for m in messages],
        [m.language for m in messages],
        store.corpus_bodies(exclude_batch=batch_id),
        validate.default_blocklist(),
        validate.default_policy(),
    )
    click.echo(f"batch_id={batch_id}")
    click.echo(f"status={batch.status.value}")
    click.echo(f"messages={rep.message_count}")
    for lang in sorted(rep.language_counts):
        click.echo(f"language.{lang}={rep.language_counts[lang]}")
    click.echo(f"exact_duplicates={len(rep.exact_duplicates)}")
    click.echo(f"near_duplicates={len(rep.near_duplicates)}")
    click.echo(f"blocklist_fraction={rep.blocklist_fraction:.4f}")
    click.echo(f"flagged_fraction={rep.flagged_fraction:.4f}")
    click.echo(f"recommendation={rep.recommendation}")
    for reason in rep.reasons:
        click.echo(f"reason={reason}")


@main.command()
@click.argument("batch_id")
@click.argument("decision", type=click.Choice(["approve", "reject"]))
@click.option("--scheme", default=None,
              help="Reward scheme name or scheme file path (approve only).")
@click.option("--reason", default=None, help="Why a batch is rejected.")
@click.pass_context
@catches_errors
def moderate(ctx, batch_id: str, decision: str, scheme: str | None, reason: str | None):
    """Approve or reject a pending batch."""
    store = _open_store(ctx)
    scheme_obj = rewards.load_scheme(scheme) if scheme else None
    batch = validate.moderate(store, batch_id, decision, reason=reason, scheme=scheme_obj)
    click.echo(f"batch_id={batch.id}")
    click.echo(f"status={batch.status.value}")
    if batch.status.value == "approved":
        click.echo(f"reward={batch.reward_amount}")
        click.echo(f"currency={batch.reward_currency}")
    elif batch.rejection_reason:
        click.echo(f"reason={batch.rejection_reason}")


@main.command(name="stats")
@click.option("--language", type=click.Choice(_LANGUAGES), default=None)
@click.pass_context
@catches_errors
def stats_cmd(ctx, language: str | None):
    """Print the statistics report as JSON."""
    store = _open_store(ctx)
    full = stats.corpus_report(store)
    if language is None:
        click.echo(json.dumps(full, sort_keys=True))
        return
    sliced = {
        "language": language,
        "summary": full["summary"]["languages"].get(language, {}),
        "methods": full["methods"].get(language, {}),
        "sources": full["sources"].get(language, {}),
        "contributor_distribution": full["contributor_distribution"].get(language, []),
        "length": full["length"].get(language, {}),
        "demographics": {
            dim: entry.get(language, {}) for dim, entry in full["demographics"].items()
        },
    }
    click.echo(json.dumps(sliced, sort_keys=True))


@main.group(name="release")
def release_group():
    """Build and verify immutable monthly releases."""


@release_group.command(name="build")
@click.argument("version_id")
@click.pass_context
@catches_errors
def release_build(ctx, version_id: str):
    store = _open_store(ctx)
    version, artifacts = release.build_release(store, version_id)
    click.echo(f"version_id={version.version_id}")
    click.echo(f"messages_en={version.message_count_en}")
    click.echo(f"messages_zh={version.message_count_zh}")
    for name in sorted(artifacts):
        click.echo(f"artifact={name} sha256={version.artifact_checksums[name]}")


@release_group.command(name="verify")
@click.argument("version_id")
@click.pass_context
@catches_errors
def release_verify(ctx, version_id: str):
    store = _open_store(ctx)
    result = release.verify_release(store, version_id)
    click.echo(f"version_id={version_id}")
    click.echo(f"ok={'true' if result.ok else 'false'}")
    for name in result.checked:
        click.echo(f"verified={name}")
    for problem in result.problems:
        click.echo(f"problem={problem}")
    if not result.ok:
        sys.exit(1)


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Serve a built web UI from this directory under /ui.")
@click.pass_context
@catches_errors
def serve(ctx, port: int, host: str, ui_dir: Path | None):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(_open_store(ctx), _secrets(ctx), ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
