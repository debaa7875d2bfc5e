#
# Copyright (c) 2026 The libdemark authors. All rights reserved.
# Licensed under the MIT license. See LICENSE file in the project root for details.
#

from __future__ import annotations

import argparse
import sys
from typing import Callable, Sequence

from libdemark import __version__
from libdemark.attacks.attack import DeMarkAttack
from libdemark.attacks.distortion import DistortionKind, DistortionSpec, distort
from libdemark.harness.ablation import run_ablation
from libdemark.harness.components import obtain_attack_model, obtain_scheme, obtain_watermarker
from libdemark.harness.dispersal_study import run_dispersal_study
from libdemark.harness.evaluation import draw_messages, run_evaluation
from libdemark.harness.experiment_config import DispersalMode, ExperimentConfig, load_experiment_config
from libdemark.harness.finetune import run_finetune
from libdemark.imagekit.image_io import load_image, save_image
from libdemark.liblog import liblog
from libdemark.losses.objectives import SPLVariant
from libdemark.metrics.latent import BitMessage
from libdemark.utils.exceptions import ConfigError, MetricDomainError, RegistryError

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_experiment_config(args.config) if args.config else ExperimentConfig()
    return cfg.with_overrides(seed=args.seed, output_dir=args.output_dir)


def _cmd_train_wm(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    watermarker = obtain_watermarker(cfg)
    print(f"watermarker: {cfg.watermarker_path} ({watermarker.config.config_hash})")


def _cmd_train_attack(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    model = obtain_attack_model(cfg)
    print(f"attack model: {cfg.attack_model_path} ({model.config.config_hash})")


def _cmd_embed(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    scheme = obtain_scheme(cfg)

    if args.message is not None:
        message = BitMessage.from_string(args.message)
    else:
        message = draw_messages(1, scheme.message_length, cfg.seed)[0]

    save_image(scheme.embed(load_image(args.input), message), args.output)
    print(f"message: {message}")


def _cmd_attack(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    attack = DeMarkAttack(obtain_attack_model(cfg, train_if_missing=False))
    save_image(attack(load_image(args.input)), args.output)


def _cmd_distort(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    try:
        spec = DistortionSpec(args.kind, args.strength, seed=cfg.seed)
    except MetricDomainError as e:
        raise ConfigError(str(e)) from e

    save_image(distort(load_image(args.input), spec), args.output)


def _cmd_eval(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    report = run_evaluation(cfg)
    print(report.to_frame().groupby("attack", sort=False)["bitacc"].mean().to_string())


def _cmd_dispersal(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    study = run_dispersal_study(cfg, args.mode)
    print(study.medians())


def _cmd_ablate(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    table = run_ablation(cfg, alphas=args.alphas, variants=args.variants)
    print(table.to_string(index=False))


def _cmd_finetune(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    print(run_finetune(cfg).to_dict())


def build_parser() -> argparse.ArgumentParser:
    """Returns the argument parser of the libdemark command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment configuration JSON")
    common.add_argument("--seed", type=int, help="override the experiment seed")
    common.add_argument("--output-dir", help="override the output directory")
    common.add_argument("-v", "--verbose", action="store_true", help="log debug messages")

    parser = argparse.ArgumentParser(
        prog="libdemark",
        description="Query-free watermark removal experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name: str, handler: Callable, help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.set_defaults(handler=handler)
        return sub

    add("train-wm", _cmd_train_wm, "train or load the reference watermarking scheme")
    add("train-attack", _cmd_train_attack, "train or load the DeMark attack model")

    embed = add("embed", _cmd_embed, "watermark one image")
    embed.add_argument("--input", required=True)
    embed.add_argument("--output", required=True)
    embed.add_argument("--message", help="bit string to embed, random by default")

    attack = add("attack", _cmd_attack, "remove the watermark of one image with the trained attack model")
    attack.add_argument("--input", required=True)
    attack.add_argument("--output", required=True)

    distortion = add("distort", _cmd_distort, "apply one baseline distortion to an image")
    distortion.add_argument("--input", required=True)
    distortion.add_argument("--output", required=True)
    distortion.add_argument("--kind", required=True, choices=[kind.value for kind in DistortionKind])
    distortion.add_argument("--strength", required=True, type=float)

    add("eval", _cmd_eval, "embed, attack and evaluate the test set")

    dispersal = add("dispersal", _cmd_dispersal, "measure the dispersal of the sparse latent")
    dispersal.add_argument("--mode", choices=[mode.value for mode in DispersalMode])

    ablate = add("ablate", _cmd_ablate, "train and evaluate one attack model per sparsity weight and loss variant")
    ablate.add_argument("--alphas", type=float, nargs="+")
    ablate.add_argument("--variants", nargs="+", choices=[variant.value for variant in SPLVariant])

    add("finetune-detector", _cmd_finetune, "fine-tune the reference detector on attacked images")

    return parser


def cli_main(argv: Sequence[str] | None = None) -> int:
    """Runs one libdemark command.

    Args:
        argv (Sequence[str], optional): The arguments, without the program name. Defaults to sys.argv[1:].

    Returns:
        int: 0 on success, 1 on a configuration error, 2 on any other failure.
    """
    parser = build_parser()

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits with 0 for --help and --version, 2 for usage errors
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG_ERROR

    if args.verbose:
        liblog.set_level("DEBUG")

    try:
        cfg = _load_config(args)
        args.handler(cfg, args)
    except (ConfigError, RegistryError, FileNotFoundError) as e:
        print(f"libdemark {args.command}: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except Exception as e:
        print(f"libdemark {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR

    return EXIT_OK


def main() -> None:
    """Entry point of the libdemark console script."""
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
