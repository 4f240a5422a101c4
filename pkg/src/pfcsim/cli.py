"""pfcsim command line: one entry point for every suite and experiment.

Exit codes: 0 success, 2 a check fell outside its tolerance, 1 usage error.
"""
from __future__ import annotations

import argparse
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from . import lab, suites
from .qv import QvInstance, all_inputs, shipped_instance, shipped_instance_names

EXIT_OK, EXIT_USAGE, EXIT_THRESHOLD = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], cwd=Path(__file__).parent,
                             capture_output=True, text=True, timeout=5)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def _load_instance(name: str) -> QvInstance:
    if name in shipped_instance_names():
        return shipped_instance(name)
    p = Path(name)
    if not p.exists():
        raise UsageError(f"no instance named {name!r} (shipped: {', '.join(shipped_instance_names())})")
    return QvInstance.load(p)


def _protocol_cfg(args):
    from .protocol import ProtocolConfig
    return ProtocolConfig(r=args.r, k=args.k, claw_width=args.w)


# ------------------------------------------------------------- handlers

def cmd_pfc_correctness(args):
    out = {}
    for basis in ("Z", "X") if args.basis == "both" else (args.basis,):
        out[basis] = suites.pfc_correctness(basis, args.n or 4, args.lam_tok, args.trials or 10_000,
                                            args.seed, args.engine, token_register=args.token_register)
    return out, all(r["passed"] for r in out.values())


def cmd_pfc_rotation(args):
    r = suites.rotation_sweep(tuple(range(2, args.n_max + 1, 2)))
    return r, r["passed"]


def cmd_token_demo(args):
    from .token import DoubleSign, token_gen, token_sign, token_verify
    rates = [suites.token_rates(lam, args.trials or 10_000, args.seed) for lam in args.lam_tok]
    rng = np.random.default_rng(args.seed)
    vk, sk = token_gen(rng, 16, 1)
    sigma = token_sign((0,), sk, rng)
    try:
        token_sign((1,), sk, rng)
        second = "signed"
    except DoubleSign:
        second = "refused"
    demo = {"signature_0_verifies": token_verify(vk, (0,), sigma),
            "same_signature_on_1_verifies": token_verify(vk, (1,), sigma), "second_sign": second}
    return {"rates": rates, "demo": demo}, all(r["passed"] for r in rates) and second == "refused"


def cmd_tcf_decode(args):
    s = suites.tcf_structure(min(args.w, 4), seed=args.seed)
    d = suites.tcf_hadamard_decode(args.w, args.trials or 10_000, args.seed)
    return {"structure": s, "decode": d}, s["passed"] and d["passed"]


def _pick_x(instance, x):
    if x is None:
        return all_inputs(instance.input_width)[0]
    if len(x) != instance.input_width or set(x) - {"0", "1"}:
        raise UsageError(f"-x must be {instance.input_width} bits")
    return x


def cmd_cv_run(args):
    from .protocol import combine, cv_gen, cv_ver, fiat_shamir_handle, run_cv_prover
    instance = _load_instance(args.instance)
    x = _pick_x(instance, args.x)
    cfg = _protocol_cfg(args)
    rng = np.random.default_rng(args.seed)
    params = cv_gen(instance, cfg, rng)
    H = fiat_shamir_handle(rng.bytes(32), cfg.r, cfg.k)
    proof, T = run_cv_prover(instance, x, params.pp, H, rng)
    samples = cv_ver(instance, x, params, proof, H)
    out = combine(instance, samples) if samples is not None else None
    res = {"instance": instance.name, "x": x, "T": "".join(map(str, T)), "accepted": samples is not None,
           "samples": samples, "output": out, "expected": instance.ideal_value(x),
           "proof": {"b": proof.b, "y": proof.y, "z": proof.z}}
    return res, out == instance.ideal_value(x)


def cmd_pv_run(args):
    from .protocol import combine, pv_gen, pv_prove, pv_verify, transcript
    instance = _load_instance(args.instance)
    x = _pick_x(instance, args.x)
    cfg = _protocol_cfg(args)
    runs = []
    good = 0
    count = args.trials or 1
    for s in range(count):
        rng = np.random.default_rng([args.seed, s])
        keys = pv_gen(instance, cfg, rng)
        proof = pv_prove(keys.pk, keys.oracles, instance, x, rng)
        verdict = pv_verify(keys.vk, x, proof)
        t = transcript(keys.vk, x, proof, verdict)
        t["output"] = combine(instance, verdict.samples) if verdict.accepted else None
        t["expected"] = instance.ideal_value(x)
        good += t["output"] == t["expected"]
        runs.append(t if count == 1 else {k: t[k] for k in ("accepted", "output", "expected", "T")})
    res = runs[0] if count == 1 else {"runs": runs, "good": good, "count": count}
    return res, good == count


def cmd_obfuscate(args):
    from .qobf import qobf
    if not args.q:
        raise UsageError("obfuscate needs -q circuit.json")
    if not args.o:
        raise UsageError("obfuscate needs -o bundle.json")
    Q = _load_instance(args.q)
    bundle = qobf(Q, np.random.default_rng(args.seed), _protocol_cfg(args),
                  repeated_use=not args.single_use)
    bundle.save(args.o)
    return {"instance": Q.name, "bundle": args.o, "pseudo_deterministic": Q.is_pseudo_deterministic()}, True


def cmd_eval(args):
    from .qobf import ObfuscatedProgram, qeval_record
    if not args.b or not Path(args.b).exists():
        raise UsageError("eval needs an existing bundle: run `obfuscate` first")
    bundle = ObfuscatedProgram.load(args.b)
    Q = QvInstance.from_dict(bundle.ct.payload)
    x = _pick_x(Q, args.x)
    rec = qeval_record(bundle, x, np.random.default_rng(args.seed))
    if not bundle.repeated_use:
        bundle.save(args.b)  # the proving key is now spent
    return {"x": x, "output": rec.bit, "failure_bound": rec.failure_bound,
            "restore_fidelity": rec.restore_fidelity}, rec.bit is not None


def cmd_inner_product(args):
    cfg = lab.ExperimentConfig(n=args.n or 4, d=args.d or 2, trials=args.trials or 1000, seed=args.seed,
                               family=args.family, ancilla=args.ancilla, parallel=args.parallel)
    res = lab.inner_product_experiment(cfg)
    ok = res.summary["mean"] <= res.summary["bound"]
    if args.family == "coset":
        ok = abs(res.summary["mean"] - 0.5) <= 1e-12
    return res, ok


def cmd_welch(args):
    res = lab.welch_sweep(args.trials or 1000, args.seed)
    return res, res.summary["violations"] == 0


def cmd_robustness(args):
    res = lab.robustness_facts_scan(args.trials or 100_000, args.seed)
    ok = (res["bound_violations"] == 0 and res["implication_violations"] == 0
          and res["inner_product_violations"] == 0 and res["projector_violations"] == 0
          and abs(res["symmetric_value"] - 1.5) <= 1e-9)
    return res, ok


def cmd_dim1_attack(args):
    n = args.n or 8
    res = lab.dim1_attack_runs(n, args.trials or 100, args.dim, args.seed)
    runs = res.summary["seeds"]
    if args.dim == 1:
        ok = res.summary["flip_successes"] >= 0.99 * runs and res.summary["queries"] == [n]
    else:
        ok = runs - res.summary["flip_successes"] >= 0.99 * runs
    return res, ok


def cmd_binding_game(args):
    rng = np.random.default_rng(args.seed)
    rec = lab.binding_game(args.n or 4, args.committer, args.opener, rng, args.d)
    return rec.to_dict(), True


# ------------------------------------------------------------- parser

def _common(p):
    p.add_argument("--seed", type=int, default=0, help="global seed (u64)")
    p.add_argument("--out", help="write results here; a manifest goes next to it")
    p.add_argument("--trials", type=int, help="trial / run count")
    p.add_argument("--n", type=int, help="ambient dimension")
    p.add_argument("--d", type=int, help="subspace dimension")
    p.add_argument("--config", help="flat JSON file of flag defaults")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")
    p.set_defaults(fmt="json")


def _protocol_flags(p):
    p.add_argument("--r", type=int, default=9)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--w", type=int, default=4, help="claw width")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pfcsim", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.set_defaults(handler=fn)
        return p

    p = add("pfc-correctness", cmd_pfc_correctness, "commit/open/decode vs direct measurement")
    p.add_argument("--basis", choices=("Z", "X", "both"), default="both")
    p.add_argument("--lam-tok", type=int, default=8)
    p.add_argument("--engine", choices=("compressed", "dense"), default="compressed")
    p.add_argument("--token-register", action="store_true", help="dense engine: simulate K1 and G as qubits")

    p = add("pfc-rotation", cmd_pfc_rotation, "exhaustive coset-rotation fidelity")
    p.add_argument("--n-max", type=int, default=6)

    p = add("token-demo", cmd_token_demo, "signature-token verify rates and one-shot behavior")
    p.add_argument("--lam-tok", type=int, nargs="+", default=[4, 8])

    p = add("tcf-decode", cmd_tcf_decode, "TCF structure and Hadamard-round decoding")
    p.add_argument("--w", type=int, default=3)

    for name, fn, help_ in (("cv-run", cmd_cv_run, "one classical-verification run"),
                            ("pv-run", cmd_pv_run, "publicly verifiable runs with transcript")):
        p = add(name, fn, help_)
        p.add_argument("--instance", default="and2", help="shipped name or JSON path")
        p.add_argument("-x", help="input bits")
        _protocol_flags(p)

    p = add("obfuscate", cmd_obfuscate, "obfuscate a circuit into a bundle file")
    p.add_argument("-q", help="circuit JSON (or shipped name)")
    p.add_argument("-o", help="bundle output path")
    p.add_argument("--single-use", action="store_true")
    _protocol_flags(p)

    p = add("eval", cmd_eval, "evaluate a bundle on an input")
    p.add_argument("-b", help="bundle path")
    p.add_argument("-x", help="input bits")

    p = add("inner-product", cmd_inner_product, "inner products over the relation")
    p.add_argument("--family", choices=lab.FAMILIES, default="coset")
    p.add_argument("--ancilla", type=int, default=1)
    p.add_argument("--parallel", type=int, default=1)

    add("welch", cmd_welch, "Welch-bound sweep")
    add("robustness", cmd_robustness, "robustness and inner-product facts")

    p = add("dim1-attack", cmd_dim1_attack, "binding break for one-dimensional subspaces")
    p.add_argument("--dim", type=int, default=1)

    p = add("binding-game", cmd_binding_game, "projected-norm binding game")
    p.add_argument("--committer", choices=lab.COMMITTERS, default="uniform-a0")
    p.add_argument("--opener", choices=lab.OPENERS, default="identity")
    return parser


def _flatten(d: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in d.items():
        if isinstance(v, dict):
            flat.update(_flatten(v, f"{prefix}{k}."))
        elif not isinstance(v, list):
            flat[prefix + str(k)] = v
    return flat


def _serialize(result, fmt: str) -> str:
    if isinstance(result, lab.ExperimentResult):
        return result.to_csv() if fmt == "csv" else result.to_json() + "\n"
    if fmt == "csv":
        flat = _flatten(result)
        return ",".join(flat) + "\n" + ",".join(str(v) for v in flat.values()) + "\n"
    return json.dumps(result, indent=1, sort_keys=True, default=str) + "\n"


def _apply_config(parser, argv):
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            defaults = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"bad config file: {e}")
        if not isinstance(defaults, dict):
            raise UsageError("config must be a flat JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in defaults.items()})
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if not getattr(args, "handler", None):
            raise UsageError("a subcommand is required")
        t0 = time.time()
        result, ok = args.handler(args)
    except UsageError as e:
        print(f"pfcsim: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    wall = time.time() - t0
    text = _serialize(result, args.fmt)
    config = {k: v for k, v in vars(args).items() if k not in ("handler",)}
    manifest = {"subcommand": args.command, "config": config, "seed": args.seed,
                "git_describe": _git_describe(), "outputs": [], "wall_time": wall, "passed": bool(ok)}
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        mpath = out.with_name(out.name + ".manifest.json")
        manifest["outputs"] = [str(out)]
        mpath.write_text(json.dumps(manifest, indent=1, sort_keys=True, default=str) + "\n")
    else:
        sys.stdout.write(text)
        print(json.dumps({"manifest": manifest}, sort_keys=True, default=str), file=sys.stderr)
    return EXIT_OK if ok else EXIT_THRESHOLD


if __name__ == "__main__":
    sys.exit(main())
