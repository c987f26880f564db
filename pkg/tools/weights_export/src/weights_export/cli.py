import argparse
import sys

from .export import MissingTensor, ShapeMismatch, export_checkpoint, export_random_extractor
from .topologies import TOPOLOGIES, UnknownTopology


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(
        prog="weights-export",
        description="convert checkpoints to the NNWB container + graph JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="convert a framework checkpoint")
    p.add_argument("--checkpoint", required=True, help=".pt/.pth (torch) or .npz")
    p.add_argument("--topology", required=True, choices=sorted(TOPOLOGIES))
    p.add_argument("--out", required=True, help="output bundle stem")
    p.add_argument("--factor", type=int, help="upscale factor (espcn/srgan_generator)")
    p.add_argument("--channels", type=int, help="image channels")
    p.add_argument("--blocks", type=int, help="residual blocks (srgan_generator)")

    p = sub.add_parser("random-extractor", help="seeded He-initialized extractor")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--channels", type=int, default=3)

    args = parser.parse_args(argv)
    try:
        if args.command == "export":
            kwargs = {}
            if args.factor is not None:
                kwargs["r"] = args.factor
            if args.channels is not None:
                kwargs["in_channels"] = args.channels
            if args.blocks is not None:
                kwargs["residual_blocks"] = args.blocks
            tensors = export_checkpoint(args.checkpoint, args.topology, args.out, **kwargs)
        else:
            tensors = export_random_extractor(args.seed, args.out,
                                              in_channels=args.channels)
    except (MissingTensor, ShapeMismatch, UnknownTopology, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(2)
    print(f"wrote {len(tensors)} tensors to {args.out}.nnwb (+ .json, .manifest.json)",
          file=sys.stderr)


if __name__ == "__main__":
    main()
