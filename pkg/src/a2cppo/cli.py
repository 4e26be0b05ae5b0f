"""Command-line entry point: ``python -m a2cppo <subcommand>``.

Exit status is 0 when the requested check passes, 1 when it fails, 2 on
usage errors, and the checkpoint error's own code (3-6) for unreadable files.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import checkpoint
from .harness import check_equivalence, compare_checkpoints, gradient_identity_check, run_training
from .learner import a2c_preset, parse_overrides, ppo_preset


def _emit(report: dict, path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=False)
    print(text)
    if path:
        with open(path, "w") as f:
            f.write(text + "\n")


def _cmd_train(args) -> int:
    hp = a2c_preset() if args.algo == "a2c" else ppo_preset()
    if args.config:
        with open(args.config) as f:
            hp = hp.override(**parse_overrides(f.read()))
    res = run_training(hp, args.seed, args.total_steps, algo=args.algo, out=args.out, log=args.log)
    last = res.metrics[-1]
    _emit(
        {
            "algo": args.algo,
            "seed": args.seed,
            "env_steps": res.env_steps,
            "iterations": len(res.metrics),
            "checkpoint": args.out,
            "final_policy_loss": last["policy_loss"],
            "final_value_loss": last["value_loss"],
            "final_entropy": last["entropy"],
            "config": res.hp.to_dict(),
        },
        None,
    )
    return 0


def _cmd_check_equivalence(args) -> int:
    report = check_equivalence(args.seed, args.total_steps)
    _emit(report.to_dict(), args.report)
    return 0 if report.bitwise_equal else 1


def _cmd_check_gradients(args) -> int:
    report = gradient_identity_check(args.seed, args.trials)
    report.pop("per_trial_max_abs_diff")
    _emit(report, None)
    return 0 if report["bitwise_equal"] else 1


def _cmd_compare(args) -> int:
    report = compare_checkpoints(args.a, args.b)
    _emit(report.to_dict(), None)
    return 0 if report.bitwise_equal else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="a2cppo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train A2C or PPO and write a checkpoint")
    p.add_argument("--algo", choices=("a2c", "ppo"), required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--total-steps", type=int, required=True)
    p.add_argument("--config", help="flat key=value file overriding preset fields")
    p.add_argument("--out", help="checkpoint path")
    p.add_argument("--log", help="per-iteration CSV metrics path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("check-equivalence", help="train A2C and aligned PPO, compare weights")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--total-steps", type=int, required=True)
    p.add_argument("--report", help="also write the JSON report here")
    p.set_defaults(func=_cmd_check_equivalence)

    p = sub.add_parser("check-gradients", help="clipped-surrogate vs A2C gradient identity")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, required=True)
    p.set_defaults(func=_cmd_check_gradients)

    p = sub.add_parser("compare", help="compare two checkpoints tensor by tensor")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except checkpoint.CheckpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
