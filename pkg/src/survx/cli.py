"""Command line pipeline: degrade, train, upscale, score, evaluate, bench, serve.

Exit codes: 0 success, 1 usage error, 2 runtime error.  Diagnostics go to
stderr; results go to files or stdout.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import resample
from .errors import SurvxError, ModelLoadFailure
from .harness import (
    aggregate_mos,
    build_report,
    ingest_mos,
    latency_bench,
    make_bench_input,
    method_distributions_csv,
    report_to_csv,
    report_to_json,
)
from .image import ImageTensor, load_image, save_image
from .metrics import (
    dists_score,
    fid_between_sets,
    lpips_score,
    mse_psnr,
    random_extractor,
    ssim,
)
from .models import (
    EspcnConfig,
    TrainConfig,
    bicubic_upscale,
    build_espcn,
    build_srgan_generator,
    extract_training_patches,
    init_espcn_weights,
    load_bundle,
    random_inference_weights,
    save_bundle,
    train_espcn,
    upscale,
)

DEFAULT_METRICS = ("mse", "psnr", "ssim", "lpips", "dists")
IMAGE_EXTS = (".png", ".ppm", ".pgm")


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage problems."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_any(path) -> ImageTensor:
    path = Path(path)
    if path.suffix == ".npy":
        return ImageTensor(np.load(path))
    return load_image(path)


def _save_any(path, img: ImageTensor) -> None:
    path = Path(path)
    if path.suffix == ".npy":
        np.save(path, img.data)
    else:
        save_image(path, img)


# --- subcommand implementations ---------------------------------------------

def cmd_degrade(args) -> int:
    img = _load_any(args.infile)
    lr = resample.degrade(img, args.factor)
    if not args.quantize and Path(args.out).suffix != ".npy":
        print("--no-quantize requires a .npy output; image files are 8-bit",
              file=sys.stderr)
        return 1
    _save_any(args.out, lr)
    print(f"{args.infile} {img.height}x{img.width} -> {args.out} {lr.height}x{lr.width}",
          file=sys.stderr)
    return 0


def _hr_files(folder) -> list:
    files = sorted(p for p in Path(folder).iterdir()
                   if p.suffix.lower() in IMAGE_EXTS)
    return files


def cmd_train_espcn(args) -> int:
    espcn_cfg = EspcnConfig(r=args.factor, input_mode=args.input_mode,
                            activation=args.activation)
    patches = []
    for path in _hr_files(args.hr_dir):
        img = load_image(path)
        if espcn_cfg.input_mode == "luma" and img.channels == 3:
            from .image import rgb_to_luma
            img = rgb_to_luma(img)
        patches.extend(extract_training_patches(img, args.factor))
    print(f"extracted {len(patches)} patch pairs from {args.hr_dir}", file=sys.stderr)
    cfg = TrainConfig(seed=args.seed, max_epochs=args.epochs,
                      batch_size=args.batch_size)
    weights, log = train_espcn(patches, cfg, espcn_cfg)
    spec = build_espcn(espcn_cfg)
    save_bundle(args.out, spec, weights, r=args.factor, input_mode=espcn_cfg.input_mode)
    if args.loss_log:
        with open(args.loss_log, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "loss", "learning_rate"])
            for e in log:
                w.writerow([e.epoch, repr(e.loss), repr(e.learning_rate)])
    print(f"trained {len(log)} epochs, final loss {log[-1].loss:.6g} -> {args.out}.json/.nnwb",
          file=sys.stderr)
    return 0


def cmd_upscale(args) -> int:
    img = _load_any(args.infile)
    if args.model == "bicubic":
        out = bicubic_upscale(img, args.factor)
    else:
        try:
            bundle = load_bundle(args.model)
        except (OSError, SurvxError) as exc:
            raise ModelLoadFailure(f"{args.model}: {exc}") from exc
        out = upscale(img, bundle.spec, bundle.weights, bundle.r, bundle.input_mode)
    _save_any(args.out, out)
    print(f"{args.infile} -> {args.out} {out.height}x{out.width}", file=sys.stderr)
    return 0


def _extractor_for(args, channels: int):
    if getattr(args, "extractor", None):
        bundle = load_bundle(args.extractor)
        from .metrics.features import FeatureExtractorSpec
        taps = list(bundle.spec.outputs)
        tap_channels = []
        for name in taps:
            node = bundle.spec.node(name)
            while node.op_kind not in ("conv2d",):
                node = bundle.spec.node(node.inputs[0])
            tap_channels.append(node.params["out_channels"])
        return FeatureExtractorSpec(bundle.spec, taps, tap_channels), bundle.weights
    return random_extractor(seed=args.extractor_seed, in_channels=channels)


def cmd_score(args) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    unknown = set(metrics) - set(DEFAULT_METRICS)
    if unknown:
        print(f"unknown metrics: {sorted(unknown)}", file=sys.stderr)
        return 1
    rows = []
    with open(args.manifest, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"reference_path", "candidate_path", "method_id"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            print(f"manifest needs columns {sorted(need)}", file=sys.stderr)
            return 1
        rows = list(reader)
    base = Path(args.manifest).parent
    extractor_cache = {}
    out_fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out_fh, lineterminator="\n")
        writer.writerow(["image_id", "method_id", "reference_path", "candidate_path",
                         *metrics])
        for row in rows:
            ref = _load_any(_resolve(base, row["reference_path"]))
            cand = _load_any(_resolve(base, row["candidate_path"]))
            image_id = Path(row["reference_path"]).stem
            values = []
            needs_features = {"lpips", "dists"} & set(metrics)
            if needs_features:
                key = ref.channels
                if key not in extractor_cache:
                    extractor_cache[key] = _extractor_for(args, ref.channels)
                fx, fx_weights = extractor_cache[key]
            for metric in metrics:
                if metric == "mse":
                    values.append(mse_psnr(ref, cand)[0])
                elif metric == "psnr":
                    values.append(mse_psnr(ref, cand)[1])
                elif metric == "ssim":
                    values.append(ssim(ref, cand)[0])
                elif metric == "lpips":
                    values.append(lpips_score(ref, cand, fx, fx_weights))
                elif metric == "dists":
                    values.append(dists_score(ref, cand, fx, fx_weights))
            writer.writerow([image_id, row["method_id"].strip(),
                             row["reference_path"], row["candidate_path"],
                             *(repr(v) for v in values)])
            out_fh.flush()
    finally:
        if args.out:
            out_fh.close()
    return 0


def _resolve(base: Path, p: str) -> Path:
    path = Path(p)
    return path if path.is_absolute() else base / path


def cmd_fid(args) -> int:
    set_a = [_load_any(p) for p in _hr_files(args.dir_a)]
    set_b = [_load_any(p) for p in _hr_files(args.dir_b)]
    if len(set_a) < 2 or len(set_b) < 2:
        print("each directory needs >= 2 images", file=sys.stderr)
        return 1
    fx, weights = _extractor_for(args, set_a[0].channels)
    value = fid_between_sets(set_a, set_b, fx, weights)
    print(repr(value))
    return 0


def cmd_evaluate(args) -> int:
    records = ingest_mos(Path(args.mos).read_bytes())
    agg = aggregate_mos(records)
    metric_tables: dict = {}
    with open(args.metric_table, newline="") as fh:
        reader = csv.DictReader(fh)
        fixed = {"image_id", "method_id", "reference_path", "candidate_path"}
        metric_names = [c for c in (reader.fieldnames or []) if c not in fixed]
        for row in reader:
            for metric in metric_names:
                value = float(row[metric])
                metric_tables.setdefault(metric, {})[
                    (row["image_id"], row["method_id"])] = value
    latency = None
    if args.latency:
        latency = json.loads(Path(args.latency).read_text())
    report = build_report(agg, metric_tables, latency=latency, alpha=args.alpha)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(report_to_json(report))
    (out_dir / "report.csv").write_text(report_to_csv(report))
    (out_dir / "distributions.csv").write_text(method_distributions_csv(report))
    print(f"report written to {out_dir}", file=sys.stderr)
    return 0


def _bench_models(tokens, factor: int, channels: int, seed: int) -> dict:
    models = {}
    for token in tokens:
        if token == "bicubic":
            models["bicubic"] = lambda img: bicubic_upscale(img, factor)
        elif token == "espcn" or token.startswith("espcn:"):
            cfg = EspcnConfig(r=factor, input_mode="luma" if channels == 1 else "rgb")
            spec = build_espcn(cfg)
            weights = init_espcn_weights(spec, seed)
            models[token] = (lambda s, w, c: lambda img: upscale(img, s, w, factor, c.input_mode))(spec, weights, cfg)
        elif token == "srgan" or token.startswith("srgan:"):
            blocks = int(token.split(":", 1)[1]) if ":" in token else 16
            spec = build_srgan_generator(blocks, factor, channels)
            weights = random_inference_weights(spec, seed)
            models[token] = (lambda s, w: lambda img: upscale(img, s, w, factor, "rgb" if channels == 3 else "luma"))(spec, weights)
        else:
            try:
                bundle = load_bundle(token)
            except (OSError, SurvxError) as exc:
                raise ModelLoadFailure(f"{token}: {exc}") from exc
            models[token] = (lambda b: lambda img: upscale(
                img, b.spec, b.weights, b.r, b.input_mode))(bundle)
    return models


def cmd_bench(args) -> int:
    tokens = [t.strip() for t in args.models.split(",") if t.strip()]
    img = make_bench_input(args.height, args.width, args.channels, args.seed)
    models = _bench_models(tokens, args.factor, args.channels, args.seed)
    results = latency_bench(models, img, args.reps)
    doc = {name: {"median_s": row["median_s"], "iqr_s": row["iqr_s"]}
           for name, row in results.items()}
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print("model,median_s,iqr_s")
    for name, row in results.items():
        print(f"{name},{row['median_s']:.6f},{row['iqr_s']:.6f}")
    return 0


def cmd_serve_mos(args) -> int:
    from .server import make_server

    data_dir = args.data_dir or os.environ.get("SURVX_DATA_DIR")
    if not data_dir:
        print("provide --data-dir or set SURVX_DATA_DIR", file=sys.stderr)
        return 1
    httpd = make_server(data_dir, port=args.port, seed=args.seed,
                        ui_dir=args.ui_dir, verbose=True)
    host, port = httpd.server_address[:2]
    print(f"serving MOS ratings on http://{host}:{port} from {data_dir}",
          file=sys.stderr, flush=True)
    try:
        httpd.serve_forever()
    finally:
        httpd.server_close()
    return 0


# --- argument wiring ----------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="survx",
                     description="super-resolution upscaling and quality evaluation")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("degrade", help="bicubic downscale by an integer factor")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--factor", type=int, default=4)
    p.add_argument("--quantize", dest="quantize", action="store_true", default=True)
    p.add_argument("--no-quantize", dest="quantize", action="store_false",
                   help="keep float samples (requires .npy output)")
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("train-espcn", help="train the sub-pixel CNN on HR images")
    p.add_argument("--hr-dir", required=True)
    p.add_argument("--out", required=True, help="output bundle stem")
    p.add_argument("--factor", type=int, default=4)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--input-mode", choices=("luma", "rgb"), default="luma")
    p.add_argument("--activation", choices=("tanh", "relu"), default="tanh")
    p.add_argument("--loss-log", help="per-epoch loss CSV")
    p.set_defaults(func=cmd_train_espcn)

    p = sub.add_parser("upscale", help="upscale with bicubic or a model bundle")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--model", default="bicubic", help="'bicubic' or bundle stem")
    p.add_argument("--factor", type=int, default=4, help="factor for bicubic")
    p.set_defaults(func=cmd_upscale)

    p = sub.add_parser("score", help="run metrics over a manifest of image pairs")
    p.add_argument("--manifest", required=True,
                   help="CSV: reference_path,candidate_path,method_id")
    p.add_argument("--metrics", default=",".join(DEFAULT_METRICS))
    p.add_argument("--out", help="results CSV (default stdout)")
    p.add_argument("--extractor", help="feature extractor bundle stem")
    p.add_argument("--extractor-seed", type=int, default=0)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("fid", help="feature distance between two image directories")
    p.add_argument("--dir-a", required=True)
    p.add_argument("--dir-b", required=True)
    p.add_argument("--extractor", help="feature extractor bundle stem")
    p.add_argument("--extractor-seed", type=int, default=0)
    p.set_defaults(func=cmd_fid)

    p = sub.add_parser("evaluate", help="MOS CSV + metric table -> report")
    p.add_argument("--mos", required=True)
    p.add_argument("--metric-table", required=True, help="output of `score`")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--alpha", type=float, default=0.001)
    p.add_argument("--latency", help="bench --json-out file to embed")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="median upscale latency per model")
    p.add_argument("--models", required=True,
                   help="comma list: bicubic, espcn, srgan[:B], or bundle stems")
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--channels", type=int, default=1)
    p.add_argument("--factor", type=int, default=4)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json-out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve-mos", help="serve the rating UI and JSON API")
    p.add_argument("--data-dir", help="directory with manifest.csv (or SURVX_DATA_DIR)")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ui-dir", help="static UI assets directory")
    p.set_defaults(func=cmd_serve_mos)

    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except SurvxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
