"""Command line front end.

Exit codes: 0 success, 1 usage or configuration problem, 2 data problem,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .envs import estimate_lambda0, generate_fixture
from .errors import ConfigError, DataError, InputError, NumericalError
from .experiments import EXPERIMENTS, ExperimentConfig, build_env, child_seed, run_experiment


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; this CLI reserves 2 for data
    # problems, so remap to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


def _add_common(sub):
    sub.add_argument("--config", help="JSON config file; flags override its values")
    sub.add_argument("--seed", type=int, help="master seed")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--runs", type=int)
    sub.add_argument("--epsilon", type=float)
    sub.add_argument("--delta", type=float)
    sub.add_argument("--horizon", type=int, help="number of rounds T")
    sub.add_argument("--policy", action="append",
                     help="policy to run (repeatable): linucb, private-linucb, "
                          "private-linucb-dgs, random")
    sub.add_argument("--noise-shape", choices=["per_coordinate", "l2_spherical"])
    sub.add_argument("--schedule", choices=["exact", "simplified", "constant"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dgsbandit",
                     description="Benchmarks for private linear contextual bandits")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        _add_common(sub.add_parser(name, help="run the %s experiment" % name))
    gen = sub.add_parser("gen-fixture", help="write a synthetic replay dataset")
    gen.add_argument("--out", required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--items", type=int, default=300)
    gen.add_argument("--users", type=int, default=20)
    gen.add_argument("--dim", type=int, default=25)
    est = sub.add_parser("estimate-lambda0",
                         help="minimum eigenvalue of the pool feature second moment")
    est.add_argument("--config", help="JSON config file providing the env section")
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--rounds", type=int, default=100)
    return parser


def _load_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise DataError("config file not found: %s" % (args.config,))
        except json.JSONDecodeError as exc:
            raise DataError("config file is not valid JSON: %s" % (exc,))
        if not isinstance(data, dict):
            raise DataError("config file must hold a JSON object")
    data["experiment"] = args.command
    overrides = {"seed": "master_seed", "out": "out_dir", "runs": "runs",
                 "epsilon": "epsilon", "delta": "delta", "horizon": "T",
                 "policy": "policies", "noise_shape": "noise_shape",
                 "schedule": "schedule"}
    for flag, field in overrides.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[field] = value
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen-fixture":
            fpath, ipath = generate_fixture(args.out, seed=args.seed, n_items=args.items,
                                            n_users=args.users, d=args.dim)
            print(json.dumps({"features": fpath, "interactions": ipath}))
            return 0
        if args.command == "estimate-lambda0":
            env_cfg = {"kind": "synthetic"}
            if args.config:
                cfg = _load_config(argparse.Namespace(config=args.config,
                                                      command="regret", seed=args.seed,
                                                      out=None, runs=None, epsilon=None,
                                                      delta=None, horizon=None, policy=None,
                                                      noise_shape=None, schedule=None))
                env_cfg = cfg.env
            env = build_env(env_cfg, child_seed(args.seed, "lambda0-probe"))
            print(json.dumps({"lambda0": estimate_lambda0(env, rounds=args.rounds)}))
            return 0
        config = _load_config(args)
        csv_path, meta_path = run_experiment(config)
        print(json.dumps({"csv": csv_path, "metadata": meta_path}))
        return 0
    except (ConfigError, InputError) as exc:
        print("error: %s" % (exc,), file=sys.stderr)
        return 1
    except DataError as exc:
        print("data error: %s" % (exc,), file=sys.stderr)
        return 2
    except (NumericalError, FloatingPointError) as exc:
        print("numerical error: %s" % (exc,), file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
