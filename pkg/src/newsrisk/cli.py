"""Command-line entrypoint.

One subcommand per pipeline stage; every output artifact starts with a
header echoing the run configuration and input digests. Exit codes: 0 on
success, 1 on validation errors, 2 on I/O or transport errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional

from . import __version__, artifacts
from .analytics import (
    cooccurrence,
    industry_distribution,
    label_distribution,
    risk_timeseries,
    sentiment_crosstab,
)
from .annotation.api import create_app
from .annotation.store import AnnotationStore, ServiceSample, ValidationFailure
from .corpus import ParseError, load_corpus, load_gazetteer, article_to_record, build_samples, SectorMap
from .endpoints import (
    InferenceClient,
    ProtocolError,
    RetryPolicy,
    TextGenerationClient,
    TransportFailure,
)
from .evaluation import SplitSpec, score, split_dataset
from .lexicon import default_lexicon, filter_corpus, headline_matches, load_lexicon
from .linear import Hyperparameters
from .multilabel import (
    TrainConfig,
    load_model,
    predict_multilabel,
    remote_classify,
    save_model,
    train_multilabel,
)
from .prompting import classify_with_llm
from .risks import CANONICAL_ORDER
from .vectorize import FitError, fit
from .corpus import tokenize


class CliParser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _config_dict(args: argparse.Namespace) -> dict:
    config = {}
    for key, value in sorted(vars(args).items()):
        if key == "func" or callable(value):
            continue
        config[key] = str(value) if isinstance(value, Path) else value
    return config


def _read_lines(path) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read().splitlines()


# -- subcommands ---------------------------------------------------------------


def cmd_ingest(args) -> int:
    corpus = load_corpus(_read_lines(args.corpus))
    gazetteer = load_gazetteer(_read_lines(args.gazetteer)) if args.gazetteer else []
    sectors = SectorMap.from_companies(gazetteer)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    inputs = [args.corpus] + ([args.gazetteer] if args.gazetteer else [])
    header = artifacts.make_header(_config_dict(args), inputs)

    article_records = []
    by_article = {}
    for article in corpus.articles:
        mentions = corpus.mentions_for(article, gazetteer)
        article_records.append(article_to_record(article, mentions))
        by_article[article.article_id] = article
    artifacts.write_jsonl(out_dir / "articles.jsonl", article_records, header)

    samples = build_samples(corpus, gazetteer)
    sample_records = []
    for sample in samples:
        article = by_article[sample.article_id]
        sample_records.append(
            artifacts.sample_to_record(
                sample,
                published_at=article.published_at.isoformat().replace("+00:00", "Z"),
                sector=sectors.get(sample.company_id),
            )
        )
    artifacts.write_jsonl(out_dir / "samples.jsonl", sample_records, header)
    print(f"ingested {len(corpus.articles)} articles, {len(samples)} samples -> {out_dir}")
    return 0


def cmd_filter(args) -> int:
    corpus = load_corpus(_read_lines(args.articles))
    lexicon = load_lexicon(_read_lines(args.lexicon)) if args.lexicon else default_lexicon()
    if args.inflections:
        lexicon = lexicon.with_inflections()
    kept = filter_corpus(corpus.articles, lexicon)
    header = artifacts.make_header(_config_dict(args), [args.articles])
    records = []
    report_lines = []
    for article in kept:
        mentions = corpus.supplied_mentions.get(article.article_id)
        records.append(article_to_record(article, mentions))
        _, hits = headline_matches(article.headline, lexicon)
        report_lines.append(
            f"{article.article_id}\t{','.join(sorted(hits))}\t{article.headline}"
        )
    artifacts.write_jsonl(args.out, records, header)
    report_path = args.report or f"{args.out}.report.txt"
    artifacts.write_text_artifact(report_path, "\n".join(report_lines), header)
    print(f"kept {len(kept)} of {len(corpus.articles)} articles -> {args.out}")
    return 0


def cmd_split(args) -> int:
    samples, raw = artifacts.read_samples(args.samples)
    spec = SplitSpec(seed=args.seed, group_by_article=not args.no_group_by_article)
    train, validation, test = split_dataset(samples, spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = artifacts.make_header(_config_dict(args), [args.samples])
    for name, part in (("train", train), ("validation", validation), ("test", test)):
        artifacts.write_jsonl(
            out_dir / f"{name}.jsonl", [raw[s.sample_id] for s in part], header
        )
    print(
        f"split {len(samples)} samples into"
        f" {len(train)}/{len(validation)}/{len(test)} -> {out_dir}"
    )
    return 0


def _hyper_from_args(args) -> Hyperparameters:
    return Hyperparameters(
        l2_lambda=args.l2_lambda,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        seed=args.seed,
    )


def cmd_train(args) -> int:
    samples, _ = artifacts.read_samples(args.samples)
    gold = artifacts.read_labels(args.gold)
    missing = [s.sample_id for s in samples if s.sample_id not in gold]
    if missing:
        raise ValueError(f"{len(missing)} samples lack gold labels (first: {missing[0]})")
    labels = [gold[s.sample_id] for s in samples]
    config = TrainConfig(
        family=args.family,
        hyper=_hyper_from_args(args),
        threshold=args.threshold,
        knn_k=args.knn_k,
        embed_dim=args.embed_dim,
        min_df=args.min_df,
        ngram_max=args.ngram_max,
        seed=args.seed,
    )
    model = train_multilabel(samples, labels, config)
    save_model(model, args.model_dir)
    header = artifacts.make_header(_config_dict(args), [args.samples, args.gold])
    artifacts.write_jsonl(Path(args.model_dir) / "run.jsonl", [], header)
    print(f"trained {args.family} model on {len(samples)} samples -> {args.model_dir}")
    return 0


def cmd_predict(args) -> int:
    samples, _ = artifacts.read_samples(args.samples)
    header_inputs = [args.samples]
    records = []
    if args.remote_endpoint:
        client = InferenceClient(
            args.remote_endpoint,
            retry=RetryPolicy(args.retry_attempts, args.backoff_base),
        )
        with client:
            for sample in samples:
                prediction = remote_classify(client, sample, threshold=args.threshold)
                records.append(_prediction_record(sample, prediction))
    else:
        if not args.model_dir:
            raise ValueError("predict needs --model-dir or --remote-endpoint")
        model = load_model(args.model_dir)
        for sample in samples:
            prediction = predict_multilabel(model, sample)
            records.append(_prediction_record(sample, prediction))
    header = artifacts.make_header(_config_dict(args), header_inputs)
    artifacts.write_jsonl(args.out, records, header)
    print(f"predicted {len(records)} samples -> {args.out}")
    return 0


def _prediction_record(sample, prediction) -> dict:
    return {
        "sample_id": sample.sample_id,
        "labels": prediction.labels.to_mapping(),
        "scores": {f.value: prediction.scores[f] for f in CANONICAL_ORDER},
    }


def cmd_evaluate(args) -> int:
    predictions = artifacts.read_labels(args.predictions)
    gold = artifacts.read_labels(args.gold)
    shared = sorted(set(predictions) & set(gold))
    if not shared:
        raise ValueError("predictions and gold share no sample ids")
    if len(shared) != len(gold) or len(shared) != len(predictions):
        raise ValueError(
            f"prediction/gold mismatch: {len(predictions)} predictions,"
            f" {len(gold)} gold, {len(shared)} shared"
        )
    report = score([predictions[s] for s in shared], [gold[s] for s in shared])
    header = artifacts.make_header(_config_dict(args), [args.predictions, args.gold])
    artifacts.write_jsonl(args.out, report.to_records(), header)
    table_path = args.table or f"{args.out}.table.txt"
    artifacts.write_text_artifact(table_path, report.to_table(), header)
    print(report.to_table())
    return 0


def cmd_prompt_classify(args) -> int:
    samples, _ = artifacts.read_samples(args.samples)
    url = args.endpoint or os.environ.get("NEWSRISK_TEXTGEN_URL")
    if not url:
        raise ValueError("no text-generation endpoint (use --endpoint or NEWSRISK_TEXTGEN_URL)")
    train_pairs = None
    vectorizer = None
    inputs = [args.samples]
    if args.mode == "few":
        if not args.train_samples or not args.train_gold:
            raise ValueError("few-shot mode needs --train-samples and --train-gold")
        train_samples, _ = artifacts.read_samples(args.train_samples)
        train_gold = artifacts.read_labels(args.train_gold)
        train_pairs = [
            (s, train_gold[s.sample_id])
            for s in train_samples
            if s.sample_id in train_gold
        ]
        vectorizer = fit([tokenize(s.truncated_text) for s, _ in train_pairs])
        inputs += [args.train_samples, args.train_gold]
    client = TextGenerationClient(
        url, retry=RetryPolicy(args.retry_attempts, args.backoff_base)
    )
    records = []
    unparseable_total = 0
    with client:
        for sample in samples:
            result = classify_with_llm(
                client,
                sample,
                mode=args.mode,
                train_samples=train_pairs,
                k=args.k,
                vectorizer=vectorizer,
                max_new_tokens=args.max_new_tokens,
                max_concurrency=args.max_concurrency,
            )
            unparseable_total += result.unparseable_count
            records.append(
                {
                    "sample_id": sample.sample_id,
                    "labels": result.labels.to_mapping(),
                    "answers": {
                        f.value: a.raw_text for f, a in result.answers.items()
                    },
                    "unparseable_count": result.unparseable_count,
                    "errors": {f.value: msg for f, msg in result.errors.items()},
                }
            )
    records.append({"summary": True, "unparseable_total": unparseable_total})
    header = artifacts.make_header(_config_dict(args), inputs)
    artifacts.write_jsonl(args.out, records, header)
    print(
        f"classified {len(samples)} samples via {args.mode}-shot prompts"
        f" ({unparseable_total} unparseable answers) -> {args.out}"
    )
    return 0


def cmd_aggregate(args) -> int:
    samples, raw = artifacts.read_samples(args.samples)
    labels = artifacts.read_labels(args.labels)
    labeled = artifacts.labeled_samples(samples, raw, labels)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header = artifacts.make_header(_config_dict(args), [args.samples, args.labels])

    dist = label_distribution(labeled)
    dist_records = [
        {"factor": f.value, "count": dist.per_factor[f]} for f in CANONICAL_ORDER
    ]
    dist_records.append(
        {
            "summary": True,
            "total": dist.total,
            "no_risk": dist.no_risk,
            "at_least_one_share": dist.at_least_one_share,
            "histogram": {str(k): v for k, v in sorted(dist.histogram.items())},
        }
    )
    artifacts.write_jsonl(out_dir / "label_distribution.jsonl", dist_records, header)

    artifacts.write_text_artifact(
        out_dir / "cooccurrence.tsv", cooccurrence(labeled).to_table(), header
    )

    series = risk_timeseries(
        labeled,
        granularity=args.granularity,
        company_id=args.company,
        sector=args.sector,
    )
    artifacts.write_jsonl(out_dir / "timeseries.jsonl", series.to_plot_records(), header)

    industry = industry_distribution(labeled)
    industry_records = []
    for sector in sorted(industry.sectors):
        shares = industry.shares(sector)
        for factor in CANONICAL_ORDER:
            industry_records.append(
                {
                    "sector": sector,
                    "factor": factor.value,
                    "count": industry.sectors[sector][factor],
                    "share": shares[factor],
                }
            )
    industry_records.append({"summary": True, "excluded": industry.excluded})
    artifacts.write_jsonl(out_dir / "industry.jsonl", industry_records, header)
    print(f"aggregated {len(labeled)} labeled samples -> {out_dir}")
    return 0


def cmd_crosstab(args) -> int:
    samples, raw = artifacts.read_samples(args.samples)
    labels = artifacts.read_labels(args.labels)
    labeled = artifacts.labeled_samples(samples, raw, labels)
    url = args.endpoint or os.environ.get("NEWSRISK_SENTIMENT_URL")
    if not url:
        raise ValueError("no sentiment endpoint (use --endpoint or NEWSRISK_SENTIMENT_URL)")
    client = InferenceClient(url, retry=RetryPolicy(args.retry_attempts, args.backoff_base))
    with client:
        crosstab = sentiment_crosstab(labeled, client)
    records = []
    for factor in CANONICAL_ORDER:
        mean = crosstab.factor_mean(factor)
        if mean is None:
            continue
        records.append(
            {
                "factor": factor.value,
                "n": crosstab.factor_counts[factor],
                "positive": mean[0],
                "neutral": mean[1],
                "negative": mean[2],
            }
        )
    background = crosstab.background_mean()
    summary = {"summary": True, "skipped": crosstab.skipped, "n": crosstab.background_count}
    if background is not None:
        summary.update(
            {"positive": background[0], "neutral": background[1], "negative": background[2]}
        )
    records.append(summary)
    header = artifacts.make_header(_config_dict(args), [args.samples, args.labels])
    artifacts.write_jsonl(args.out, records, header)
    print(f"sentiment crosstab over {crosstab.background_count} samples -> {args.out}")
    return 0


def cmd_annotate_serve(args) -> int:
    data_dir = args.data_dir or os.environ.get("NEWSRISK_DATA_DIR", "annotation-data")
    store = AnnotationStore(data_dir)
    if args.samples and not store.samples:
        samples, _ = artifacts.read_samples(args.samples)
        corpus = load_corpus(_read_lines(args.articles)) if args.articles else None
        by_article = {a.article_id: a for a in corpus.articles} if corpus else {}
        service_samples = []
        for sample in samples:
            article = by_article.get(sample.article_id)
            service_samples.append(
                ServiceSample(
                    sample_id=sample.sample_id,
                    article_id=sample.article_id,
                    company_id=sample.company_id,
                    company_name=sample.company_name,
                    headline=article.headline if article else "",
                    sentences=tuple(article.body_sentences[:5]) if article else (),
                    truncated_text=sample.truncated_text,
                )
            )
        annotators = [a.strip() for a in args.annotators.split(",") if a.strip()]
        store.enqueue(service_samples, annotators, args.calibration_count)
        print(
            f"enqueued {len(service_samples)} samples for {len(annotators)} annotators"
            f" (calibration {args.calibration_count})"
        )
    app = create_app(store)
    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> CliParser:
    parser = CliParser(prog="newsrisk", description=__doc__)
    parser.add_argument("--version", action="version", version=f"newsrisk {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("ingest", help="parse a raw corpus into articles and samples")
    p.add_argument("--corpus", required=True)
    p.add_argument("--gazetteer")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("filter", help="keep articles whose headline matches the risk lexicon")
    p.add_argument("--articles", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--lexicon", help="custom lexicon file (default: built-in 53 terms)")
    p.add_argument("--inflections", action="store_true", help="also match s/es/ed/ing forms")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("split", help="train/validation/test split")
    p.add_argument("--samples", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--no-group-by-article",
        action="store_true",
        help="allow one article's samples to span splits (exact sizes)",
    )
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train a multi-label model")
    p.add_argument("--samples", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--model-dir", required=True)
    p.add_argument("--family", choices=["random", "logreg", "svm", "knn"], default="logreg")
    p.add_argument("--l2-lambda", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--learning-rate", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--knn-k", type=int, default=5)
    p.add_argument("--embed-dim", type=int, default=64)
    p.add_argument("--min-df", type=int, default=1)
    p.add_argument("--ngram-max", type=int, default=2)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict labels with a trained model or remote endpoint")
    p.add_argument("--samples", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--model-dir")
    p.add_argument("--remote-endpoint", help="inference endpoint URL instead of a local model")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--retry-attempts", type=int, default=3)
    p.add_argument("--backoff-base", type=float, default=0.25)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against gold labels")
    p.add_argument("--predictions", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--table")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("prompt-classify", help="classify through an LLM endpoint")
    p.add_argument("--samples", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--endpoint")
    p.add_argument("--mode", choices=["zero", "few"], default="zero")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--train-samples")
    p.add_argument("--train-gold")
    p.add_argument("--max-new-tokens", type=int, default=8)
    p.add_argument("--max-concurrency", type=int, default=1)
    p.add_argument("--retry-attempts", type=int, default=3)
    p.add_argument("--backoff-base", type=float, default=0.25)
    p.set_defaults(func=cmd_prompt_classify)

    p = sub.add_parser("aggregate", help="label distribution, co-occurrence and time series")
    p.add_argument("--samples", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--granularity", choices=["month", "year"], default="month")
    p.add_argument("--company")
    p.add_argument("--sector")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("crosstab", help="sentiment means per risk factor")
    p.add_argument("--samples", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--endpoint")
    p.add_argument("--retry-attempts", type=int, default=3)
    p.add_argument("--backoff-base", type=float, default=0.25)
    p.set_defaults(func=cmd_crosstab)

    p = sub.add_parser("annotate-serve", help="run the annotation HTTP service")
    p.add_argument("--data-dir")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8100)
    p.add_argument("--samples", help="samples to enqueue on first start")
    p.add_argument("--articles", help="articles file providing headline/sentences")
    p.add_argument("--annotators", default="", help="comma-separated annotator ids")
    p.add_argument("--calibration-count", type=int, default=0)
    p.set_defaults(func=cmd_annotate_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationFailure, FitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (TransportFailure, ProtocolError) as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
