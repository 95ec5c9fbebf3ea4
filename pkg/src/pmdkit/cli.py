"""Command-line front end: reproducible checks, sweeps, and reports.

Every subcommand builds a Report whose payload is a deterministic
function of the configuration and seed (no timestamps, sorted keys), so
identical invocations emit byte-identical output.  Exit codes: 0 all
checks passed, 1 a measured check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .aqec import ErasureAdversary, compose, erasure_harness, random_adversary
from .auth import (Auth13Protocol, NmCode, TamperFunction, auth13_attack_harness,
                   nm_search, nm_verify, systematic_parity_nm)
from .densesim import QuantumChannel
from .limits import SizeGuardError
from .pmd import build_pmd, measure_pmd_epsilon
from .ptc import build_bcgst_family, measure_pairwise_detectability, \
    measure_strong_ptc_error
from .qlde import erasure_list_decode, list_size_profile, sample_random_css
from .symplectic import StabilizerCode, format_code, parse_code


@dataclass
class Check:
    name: str
    value: float | str
    bound_expr: str
    bound_value: float | str
    passed: bool


@dataclass
class Report:
    command: str
    config: dict
    seed: int | None
    checks: list[Check] = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    version: str = __version__

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, bound_expr, bound_value, passed):
        self.checks.append(Check(name, value, bound_expr, bound_value, passed))

    def to_payload(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "checks": [vars(c) for c in self.checks],
            "extras": self.extras,
            "passed": self.passed,
        }

    def render(self, fmt: str) -> str:
        payload = self.to_payload()
        if fmt == "json":
            return json.dumps(payload, sort_keys=True, indent=2) + "\n"
        if fmt == "csv":
            lines = ["check,value,bound_expr,bound_value,passed"]
            for c in self.checks:
                lines.append(f"{c.name},{c.value},{c.bound_expr},"
                             f"{c.bound_value},{c.passed}")
            return "\n".join(lines) + "\n"
        lines = [f"# {self.command} (pmdkit {self.version})"]
        for key, val in sorted(self.config.items()):
            lines.append(f"  {key} = {val}")
        if self.seed is not None:
            lines.append(f"  seed = {self.seed}")
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            lines.append(f"[{tag}] {c.name}: {c.value}  vs  {c.bound_expr}"
                         f" = {c.bound_value}")
        for key, val in sorted(self.extras.items()):
            lines.append(f"  {key}: {val}")
        lines.append("RESULT: " + ("ok" if self.passed else "FAILED"))
        return "\n".join(lines) + "\n"


def _emit(report: Report, args) -> int:
    text = report.render(args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0 if report.passed else 1


def _load_config_file(path: str) -> dict:
    """Flat key-value text: one `key = value` per line, # comments."""
    return parse_config(Path(path).read_text(encoding="utf-8"), origin=path)


def parse_config(text: str, origin: str = "<config>") -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{origin}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def dump_config(entries: dict) -> str:
    return "".join(f"{key} = {value}\n" for key, value in sorted(entries.items()))


def _expand_config(argv: list[str]) -> list[str]:
    """Splice config-file entries in as flags, before the real flags.

    Entries become `--key value` tokens right after the subcommand
    words, so anything typed on the command line wins.
    """
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    if at + 1 >= len(argv):
        raise ValueError("--config needs a file path")
    path = argv[at + 1]
    rest = argv[:at] + argv[at + 2:]
    prefix_len = 0
    while prefix_len < len(rest) and not rest[prefix_len].startswith("-"):
        prefix_len += 1
    injected = []
    for key, value in _load_config_file(path).items():
        injected += [f"--{key}", value]
    return rest[:prefix_len] + injected + rest[prefix_len:]


def _frac(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _field_override(args):
    if getattr(args, "modulus", None) is None:
        return None
    from .galois import FieldSpec
    return FieldSpec(args.lam, int(args.modulus, 0))


def cmd_ptc_check(args) -> int:
    config = {"n": args.n, "lam": args.lam,
              "mode": "exhaustive" if args.samples is None else f"samples={args.samples}"}
    if args.modulus:
        config["modulus"] = args.modulus
    family = build_bcgst_family(args.n, args.lam, field=_field_override(args))
    eps = measure_strong_ptc_error(family, samples=args.samples, seed=args.seed)
    delta = measure_pairwise_detectability(family)
    report = Report("ptc check", config, args.seed)
    eps_bound = Fraction(args.n, 2 ** args.lam)
    delta_bound = Fraction(2 * args.n, 2 ** args.lam)
    report.add("epsilon_measured", _frac(eps.value), "n/2^lam", _frac(eps_bound),
               eps.value <= eps_bound)
    report.add("delta_measured", _frac(delta.value), "2n/2^lam", _frac(delta_bound),
               delta.value <= delta_bound)
    report.extras["exhaustive"] = eps.exhaustive and delta.exhaustive
    if not eps.exhaustive:
        report.extras["worst_miss_probability"] = f"{eps.worst_miss_probability:.3e}"
    return _emit(report, args)


def cmd_pmd_verify(args) -> int:
    config = {"n": args.n, "lam": args.lam}
    if args.modulus:
        config["modulus"] = args.modulus
    family = build_bcgst_family(args.n, args.lam, field=_field_override(args))
    pmd = build_pmd(family)
    eps_rep = measure_pmd_epsilon(pmd, samples=args.samples, seed=args.seed)
    eps_ptc = measure_strong_ptc_error(family)
    delta = measure_pairwise_detectability(family)
    bound = max(float(eps_ptc.value),
                float(np.sqrt(2.0 ** -args.lam + float(delta.value))))
    report = Report("pmd verify", config, args.seed)
    report.add("epsilon", f"{eps_rep.value:.12f}",
               "max(eps_ptc, sqrt(2^-lam + delta))", f"{bound:.12f}",
               eps_rep.value <= bound + 1e-9)
    report.extras.update({
        "argmax_pauli": eps_rep.argmax.label(),
        "ptc_epsilon": _frac(eps_ptc.value),
        "delta": _frac(delta.value),
        "exhaustive": eps_rep.exhaustive,
        # Headline scaling context, not asserted at desk scale.
        "headline_bounds": f"sqrt(n)*2^(1-lam/4)={np.sqrt(args.n) * 2 ** (1 - args.lam / 4):.4f}, "
                           f"2*sqrt(n)*2^(-lam/2)={2 * np.sqrt(args.n) * 2 ** (-args.lam / 2):.4f}",
    })
    return _emit(report, args)


def cmd_qlde_decode(args) -> int:
    code = parse_code(Path(args.code).read_text(encoding="utf-8"))
    erased = tuple(int(tok) for tok in args.erased.split(",") if tok != "")
    bits = [int(ch) for ch in args.syndrome]
    result = erasure_list_decode(code, erased, bits)
    config = {"code": args.code, "erased": args.erased, "syndrome": args.syndrome}
    report = Report("qlde decode", config, None)
    report.add("list_size", len(result.entries), "guard", "nonneg", True)
    report.extras["corrections"] = [p.label() for p in result.entries]
    if args.format == "text" and not args.out:
        for p in result.entries:
            sys.stdout.write(p.label() + "\n")
        return 0
    return _emit(report, args)


def cmd_qlde_profile(args) -> int:
    code = parse_code(Path(args.code).read_text(encoding="utf-8"))
    profile = list_size_profile(code, args.delta)
    report = Report("qlde profile", {"code": args.code, "delta": args.delta}, None)
    if args.max_list is not None:
        report.add("max_list_size", profile, "required bound", args.max_list,
                   profile <= args.max_list)
    else:
        report.add("max_list_size", profile, "profile guard", 4096, profile <= 4096)
    return _emit(report, args)


def cmd_qlde_sample_css(args) -> int:
    rng = np.random.default_rng(np.random.Philox(args.seed))
    sample = sample_random_css(args.n, args.k, rng)
    report = Report("qlde sample-css", {"n": args.n, "k": args.k}, args.seed)
    report.add("realized_k", sample.code.k, "target", args.k,
               sample.code.k == args.k)
    report.extras["first_draw_full_rank"] = sample.first_draw_full_rank
    report.extras["generators"] = [g.label() for g in sample.code.gens]
    if args.out_code:
        Path(args.out_code).write_text(format_code(sample.code), encoding="utf-8")
    return _emit(report, args)


def _load_adversary(path: str, n: int) -> ErasureAdversary:
    record = json.loads(Path(path).read_text(encoding="utf-8"))
    branches = []
    for br in record["branches"]:
        mat = np.array([[complex(re, im) for re, im in row] for row in br["matrix"]])
        branches.append((mat, tuple(br["support"])))
    return ErasureAdversary(record.get("n", n), tuple(branches),
                            int(record["max_erased"]),
                            mode=record.get("mode", "adaptive"))


def cmd_aqec_simulate(args) -> int:
    family = build_bcgst_family(args.pmd_n, args.pmd_lambda)
    pmd = build_pmd(family)
    outer = parse_code(Path(args.outer).read_text(encoding="utf-8"))
    code = compose(pmd, outer)
    eps = measure_pmd_epsilon(pmd).value
    config = {"pmd_n": args.pmd_n, "pmd_lambda": args.pmd_lambda,
              "outer": args.outer, "budget": args.budget}
    report = Report("aqec simulate", config, args.seed)
    if args.adversary:
        adversaries = [("file", _load_adversary(args.adversary, outer.n))]
    else:
        rng = np.random.default_rng(np.random.Philox(args.seed or 0))
        adversaries = [(f"seeded[{i}]", random_adversary(outer.n, args.budget, rng))
                       for i in range(args.count)]
    rows = []
    for name, adv in adversaries:
        try:
            rep = erasure_harness(code, adv, eps)
        except (SizeGuardError, RuntimeError, ValueError) as exc:
            report.add(f"fidelity[{name}]", "error", "pipeline", str(exc), False)
            rows.append((name, "error", "", ""))
            continue
        report.add(f"fidelity[{name}]", f"{rep.fidelity:.12f}",
                   "1 - 3*sqrt(eps)*L^(3/4)", f"{rep.bound:.6f}", rep.passed)
        rows.append((name, f"{rep.fidelity:.12f}", rep.realized_list, rep.bound))
    report.extras["epsilon"] = f"{eps:.12f}"
    report.extras["rows"] = [
        {"adversary": r[0], "fidelity": r[1], "list": r[2], "bound": str(r[3])}
        for r in rows]
    return _emit(report, args)


def _load_attack(path: str):
    record = json.loads(Path(path).read_text(encoding="utf-8"))
    wires = []
    for wire in record["wires"]:
        kraus = tuple(np.array([[complex(re, im) for re, im in row] for row in k])
                      for k in wire)
        wires.append(kraus)
    classical = TamperFunction(tuple(record["classical"]))
    return wires, classical


def cmd_auth_simulate(args) -> int:
    family = build_bcgst_family(args.pmd_n, args.pmd_lambda)
    pmd = build_pmd(family)
    outer = parse_code(Path(args.outer).read_text(encoding="utf-8"))
    config = {"protocol": args.protocol, "pmd_n": args.pmd_n,
              "pmd_lambda": args.pmd_lambda, "outer": args.outer,
              "attack": args.attack}
    eps = measure_pmd_epsilon(pmd).value
    report = Report("auth simulate", config, args.seed)
    if args.protocol == "third":
        composed = compose(pmd, outer)
        if args.nm:
            nm = NmCode.loads(Path(args.nm).read_text(encoding="utf-8"))
        else:
            nm = systematic_parity_nm(2 * outer.n)
        proto = Auth13Protocol(composed, nm)
        wires, classical = _load_attack(args.attack)
        rep = auth13_attack_harness(proto, wires, classical)
        report.add("p_accept_wrong", f"{rep.p_accept_wrong:.12f}",
                   "eps_pmd^2 (key-recovered context)", f"{eps ** 2:.6f}",
                   True)
        report.extras.update({
            "p_accept": f"{rep.p_accept:.12f}",
            "p_reject": f"{rep.p_reject:.12f}",
            "fidelity_given_accept": f"{rep.fidelity_given_accept:.12f}",
        })
        return _emit(report, args)
    # rate-1 toy layout: the outer file spans the block messages; the
    # inner stabilizer code comes from --inner (default [[4,3]] Z^4).
    from .auth import (Auth1Protocol, auth1_block_codeword_density,
                       auth1_block_reject_probability, auth1_decode,
                       auth1_encode, stabilizer_mass, twirl_channel)
    if args.inner:
        inner_code = parse_code(Path(args.inner).read_text(encoding="utf-8"))
    else:
        from .symplectic import PauliOperator
        inner_code = StabilizerCode(4, [PauliOperator.from_label("ZZZZ")],
                                    name="[[4,3]]")
    proto = Auth1Protocol(outer, compose(pmd, inner_code),
                          systematic_parity_nm_for_pad(pmd, outer, inner_code))
    wires, _classical = _load_attack(args.attack)
    if len(wires) != proto.total_quantum:
        raise ValueError(f"attack needs {proto.total_quantum} quantum wires")
    message = np.zeros(1 << outer.k, dtype=complex)
    message[0] = 1.0
    state = auth1_encode(proto, message, seed=0)
    clean = auth1_decode(proto, state, seed=0)
    report.add("completeness", f"{clean.accept_probability:.12f}",
               "exact round trip", "1", clean.accepted
               and clean.accept_probability > 1 - 1e-9)
    b = proto.block_qubits
    for block in range(proto.n_blocks):
        rho = auth1_block_codeword_density(proto, message, block)
        channels = wires[block * b:(block + 1) * b]
        reject = auth1_block_reject_probability(proto, channels, rho)
        mass = stabilizer_mass([list(twirl_channel(k)) for k in channels],
                               inner_code)
        floor = 1 - (eps ** 2 + float(mass))
        report.add(f"block_{block}_reject", f"{reject:.12f}",
                   "1 - (eps_pmd^2 + stabilizer_mass)", f"{floor:.12f}",
                   reject >= floor - 1e-9)
    return _emit(report, args)


def systematic_parity_nm_for_pad(pmd, outer, inner_code) -> NmCode:
    from .auth import twise_pad_seed_bits
    total = outer.n // pmd.message_qubits * inner_code.n
    seed_bits = twise_pad_seed_bits(2, 2 * total, word_bits=2 * inner_code.n)
    return systematic_parity_nm(seed_bits)


def cmd_nm_search(args) -> int:
    rng = np.random.default_rng(np.random.Philox(args.seed))
    code, eps = nm_search(args.k, args.n, args.trials, rng)
    report = Report("nm search", {"k": args.k, "n": args.n, "trials": args.trials},
                    args.seed)
    report.add("epsilon_nm", f"{eps:.12f}", "best-of-trials", args.trials, True)
    if args.out_nm:
        Path(args.out_nm).write_text(code.dumps(), encoding="utf-8")
    return _emit(report, args)


def cmd_nm_verify(args) -> int:
    code = NmCode.loads(Path(args.nm).read_text(encoding="utf-8"))
    eps = nm_verify(code)
    report = Report("nm verify", {"nm": args.nm, "k": code.k, "n": code.n}, None)
    report.add("epsilon_nm", f"{eps:.12f}", "exhaustive tamper sweep", "4^n", True)
    return _emit(report, args)


def cmd_sweep(args) -> int:
    points = []
    if args.points:
        for token in args.points.split(","):
            n_str, lam_str = token.split(":")
            points.append((int(n_str), int(lam_str)))
    report = Report("sweep", {"points": args.points}, args.seed)
    rows = []
    for n, lam in points:
        try:
            family = build_bcgst_family(n, lam)
            pmd = build_pmd(family)
            eps = measure_pmd_epsilon(pmd)
            eps_ptc = measure_strong_ptc_error(family)
            delta = measure_pairwise_detectability(family)
            bound = max(float(eps_ptc.value),
                        float(np.sqrt(2.0 ** -lam + float(delta.value))))
            ok = eps.value <= bound + 1e-9
            rows.append({"n": n, "lam": lam, "epsilon": f"{eps.value:.12f}",
                         "eps_ptc": _frac(eps_ptc.value),
                         "delta": _frac(delta.value),
                         "bound": f"{bound:.12f}", "status": "ok" if ok else "fail"})
            report.add(f"pmd[{n},{lam}]", f"{eps.value:.12f}", "lemma bound",
                       f"{bound:.12f}", ok)
        except (SizeGuardError, ValueError) as exc:
            rows.append({"n": n, "lam": lam, "epsilon": "error",
                         "eps_ptc": "", "delta": "", "bound": "",
                         "status": f"error: {exc}"})
            report.extras[f"error[{n},{lam}]"] = str(exc)
    report.extras["rows"] = rows
    if args.format == "csv":
        lines = ["n,lam,epsilon,eps_ptc,delta,bound,status"]
        for r in rows:
            lines.append(",".join(str(r[k]) for k in
                                  ("n", "lam", "epsilon", "eps_ptc", "delta",
                                   "bound", "status")))
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return 0 if report.passed else 1
    return _emit(report, args)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--out", default=None, help="write the report to a file")
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmdkit",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    ptc = sub.add_parser("ptc", help="purity-testing family checks")
    ptc_sub = ptc.add_subparsers(dest="subcommand", required=True)
    ptc_check = ptc_sub.add_parser("check")
    ptc_check.add_argument("--n", type=int, required=True)
    ptc_check.add_argument("--lambda", dest="lam", type=int, required=True)
    ptc_check.add_argument("--modulus", default=None,
                           help="hex override for the GF(2^lambda) modulus")
    group = ptc_check.add_mutually_exclusive_group()
    group.add_argument("--exhaustive", action="store_true", default=True)
    group.add_argument("--samples", type=int, default=None)
    _add_common(ptc_check)
    ptc_check.set_defaults(func=cmd_ptc_check)

    pmd = sub.add_parser("pmd", help="detection-code verification")
    pmd_sub = pmd.add_subparsers(dest="subcommand", required=True)
    pmd_verify = pmd_sub.add_parser("verify")
    pmd_verify.add_argument("--n", type=int, required=True)
    pmd_verify.add_argument("--lambda", dest="lam", type=int, required=True)
    pmd_verify.add_argument("--modulus", default=None,
                            help="hex override for the GF(2^lambda) modulus")
    pmd_verify.add_argument("--samples", type=int, default=None)
    _add_common(pmd_verify)
    pmd_verify.set_defaults(func=cmd_pmd_verify)

    qlde = sub.add_parser("qlde", help="erasure list decoding")
    qlde_sub = qlde.add_subparsers(dest="subcommand", required=True)
    dec = qlde_sub.add_parser("decode")
    dec.add_argument("--code", required=True)
    dec.add_argument("--erased", default="")
    dec.add_argument("--syndrome", required=True)
    _add_common(dec)
    dec.set_defaults(func=cmd_qlde_decode)
    prof = qlde_sub.add_parser("profile")
    prof.add_argument("--code", required=True)
    prof.add_argument("--delta", type=float, required=True)
    prof.add_argument("--max-list", type=int, default=None,
                      help="fail (exit 1) when the profile exceeds this")
    _add_common(prof)
    prof.set_defaults(func=cmd_qlde_profile)
    samp = qlde_sub.add_parser("sample-css")
    samp.add_argument("--n", type=int, required=True)
    samp.add_argument("--k", type=int, required=True)
    samp.add_argument("--out-code", default=None)
    _add_common(samp)
    samp.set_defaults(func=cmd_qlde_sample_css)

    aqec = sub.add_parser("aqec", help="approximate erasure correction")
    aqec_sub = aqec.add_subparsers(dest="subcommand", required=True)
    sim = aqec_sub.add_parser("simulate")
    sim.add_argument("--pmd-n", type=int, required=True)
    sim.add_argument("--pmd-lambda", type=int, required=True)
    sim.add_argument("--outer", required=True)
    sim.add_argument("--adversary", default=None)
    sim.add_argument("--count", type=int, default=1,
                     help="seeded adversaries when no file is given")
    sim.add_argument("--budget", type=int, default=1)
    _add_common(sim)
    sim.set_defaults(func=cmd_aqec_simulate)

    auth = sub.add_parser("auth", help="keyless authentication")
    auth_sub = auth.add_subparsers(dest="subcommand", required=True)
    asim = auth_sub.add_parser("simulate")
    asim.add_argument("--protocol", choices=("third", "rate1"), required=True)
    asim.add_argument("--pmd-n", type=int, required=True)
    asim.add_argument("--pmd-lambda", type=int, required=True)
    asim.add_argument("--outer", required=True)
    asim.add_argument("--inner", default=None,
                      help="inner stabilizer code file (rate1 only)")
    asim.add_argument("--attack", required=True)
    asim.add_argument("--nm", default=None)
    _add_common(asim)
    asim.set_defaults(func=cmd_auth_simulate)

    nm = sub.add_parser("nm", help="non-malleable codes")
    nm_sub = nm.add_subparsers(dest="subcommand", required=True)
    search = nm_sub.add_parser("search")
    search.add_argument("--k", type=int, required=True)
    search.add_argument("--n", type=int, required=True)
    search.add_argument("--trials", type=int, default=4)
    search.add_argument("--out-nm", default=None)
    _add_common(search)
    search.set_defaults(func=cmd_nm_search)
    verify = nm_sub.add_parser("verify")
    verify.add_argument("--nm", required=True)
    _add_common(verify)
    verify.set_defaults(func=cmd_nm_verify)

    sweep = sub.add_parser("sweep", help="grid sweeps over family parameters")
    sweep.add_argument("--points", default="",
                       help="comma-separated n:lambda pairs, e.g. 2:1,4:2")
    _add_common(sweep)
    sweep.set_defaults(func=cmd_sweep)

    return parser


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        argv = _expand_config(list(argv))
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"pmdkit: error: {exc}\n")
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ValueError, SizeGuardError, OSError, RuntimeError) as exc:
        sys.stderr.write(f"pmdkit: error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))
