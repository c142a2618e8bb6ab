"""Command-line front end: ``simonforge <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .attacks import CASE_SCHEME, CaseId
from .copa import AeOutput, CopaInstance, InvalidTag, UnsupportedCaseError, decrypt, encrypt_and_tag
from .harness import (ConfigError, DEFAULT_CASE, cmd_attack, cmd_baseline, cmd_verify_period,
                      config_for, merge_reports, parse_blocks, seed_from_env)
from .marble import MarbleInstance, marble_decrypt, marble_encrypt_and_tag

SCHEMES = tuple(DEFAULT_CASE)
USAGE_ERROR = 2


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _campaign_args(p: argparse.ArgumentParser, trials: bool = True):
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--case", choices=[c.value for c in CaseId])
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--c", type=_positive, default=4)
    p.add_argument("--backend", choices=("statevector", "collapse"), default="collapse")
    if trials:
        p.add_argument("--trials", type=_positive, default=1)
        p.add_argument("--jobs", type=_positive, default=1)
        p.add_argument("--threshold", type=float, default=0.95)
        p.add_argument("--timing", action="store_true", help="record wall-clock times")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--tau-profile", choices=("zero", "secret"), default="zero")
    p.add_argument("--marble-version", choices=("1.0", "1.1", "1.2"), default="1.2")
    p.add_argument("--json", metavar="PATH")


def _ae_args(p: argparse.ArgumentParser):
    p.add_argument("--scheme", choices=SCHEMES, default="copa")
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--key", required=True, help="key as hex")
    p.add_argument("--ad", default="", help="associated data as hex")
    p.add_argument("--ad-bits", type=int, help="AD bit length (default 4 per hex digit)")
    p.add_argument("--nonce", help="nonce as hex (AES-COPA)")
    p.add_argument("--tau-profile", choices=("zero", "secret"), default="zero")
    p.add_argument("--marble-version", choices=("1.0", "1.1", "1.2"), default="1.2")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="simonforge",
                                 description="Simulated quantum forgery attacks on COPA, "
                                             "AES-COPA and Marble.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attack", help="run a seeded campaign of simulated attacks")
    _campaign_args(p)

    p = sub.add_parser("verify-period", help="check period identities white-box")
    _campaign_args(p, trials=False)
    p.add_argument("--k", type=_positive, default=1000, help="random inputs per case")
    p.add_argument("--all-cases", action="store_true",
                   help="check every COPA-family case (scheme/case are ignored)")

    p = sub.add_parser("baseline", help="classical birthday baseline vs the quantum attack")
    _campaign_args(p)
    p.add_argument("--classical-only", action="store_true")

    p = sub.add_parser("encrypt", help="encrypt and tag a message")
    _ae_args(p)
    p.add_argument("--msg", required=True, help="message as hex")
    p.add_argument("--msg-bits", type=int)

    p = sub.add_parser("decrypt", help="verify and decrypt")
    _ae_args(p)
    p.add_argument("--ct", required=True, help="ciphertext blocks as comma-separated hex")
    p.add_argument("--tag", required=True)
    p.add_argument("--tail-bits", type=int, help="bit length of a partial last block")

    p = sub.add_parser("report-merge", help="merge attack reports that share a config")
    p.add_argument("reports", nargs="+")
    p.add_argument("--json", metavar="PATH")
    return ap


def _emit(report: dict, path: str | None):
    text = json.dumps(report, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _config(args):
    kw = dict(n=args.n, c=args.c, backend=args.backend, seed=seed_from_env(args.seed),
              tau_profile=args.tau_profile, marble_version=args.marble_version, output=args.json)
    for name in ("trials", "jobs", "threshold", "timing"):
        if hasattr(args, name):
            kw[name] = getattr(args, name)
    return config_for(args.scheme, args.case, **kw)


def _summary_attack(r: dict) -> str:
    cfg, agg = r["config"], r["aggregate"]
    q = agg["quantum_queries"]
    return (f"{cfg['case_id']} n={cfg['n']} c={cfg['c']}: success {agg['success_rate']:.3f} "
            f"over {agg['trials']} trials, period {agg['period_rate']:.3f}, "
            f"quantum queries median {q['median']} (min {q['min']}, max {q['max']}), "
            f"bound {r['bound']:.4f}")


def _run_attack(args) -> int:
    r = cmd_attack(_config(args))
    _emit(r, args.json)
    print(_summary_attack(r))
    return 0 if r["passed"] else 1


def _run_verify(args) -> int:
    cfg = _config(args)
    cases = None
    if args.all_cases:
        cases = [c for c in CaseId if c is not CaseId.MARBLE_L]
        cfg = replace(cfg, scheme=CASE_SCHEME[cases[0]], case_id=cases[0].value)
    r = cmd_verify_period(cfg, args.k, cases)
    _emit(r, args.json)
    for row in r["results"]:
        print(f"{row['case']:>14}  n={row['width']}  {row['failures']}/{row['checked']} failures")
    return 0 if r["passed"] else 1


def _run_baseline(args) -> int:
    r = cmd_baseline(_config(args), quantum=not args.classical_only)
    _emit(r, args.json)
    print(f"{'method':<20}{'queries':>10}{'success':>9}{'c*m':>7}{'2^(n/2)':>10}")
    for row in r["comparison"]:
        print(f"{row['method']:<20}{row['queries']:>10}{row['success_rate']:>9.3f}"
              f"{row['theory_cn']:>7}{row['theory_birthday']:>10.0f}")
    return 0 if r["passed"] else 1


def _instance(args):
    key = int(args.key, 16)
    if args.scheme == "marble":
        return MarbleInstance.from_key(key, args.n, args.marble_version, args.tau_profile)
    return CopaInstance.from_key(key, args.n, args.scheme)


def _nonce(args, inst):
    if args.scheme in ("copa", "marble"):
        if args.nonce:
            raise ConfigError(f"{args.scheme} takes no nonce")
        return None
    if args.nonce is None:
        raise ConfigError("AES-COPA needs --nonce")
    return parse_blocks(args.nonce, None, inst.n)


def _width_hex(v: int, bits: int) -> str:
    return format(v, "0{}x".format((bits + 3) // 4))


def _run_encrypt(args) -> int:
    inst = _instance(args)
    ad = parse_blocks(args.ad, args.ad_bits, inst.n)
    msg = parse_blocks(args.msg, args.msg_bits, inst.n)
    nonce = _nonce(args, inst)
    if args.scheme == "marble":
        if nonce is not None:
            raise ConfigError("marble takes no nonce")
        out = marble_encrypt_and_tag(inst, ad, msg)
    else:
        out = encrypt_and_tag(inst, ad, msg, nonce)
    widths = [inst.n] * len(out.ciphertext)
    if out.tail_bits is not None:
        widths[-1] = out.tail_bits if args.scheme == "aes-copa-v1" else inst.n
    print("ct  " + ",".join(_width_hex(c, w) for c, w in zip(out.ciphertext, widths)))
    print("tag " + _width_hex(out.tag, inst.n))
    if out.tail_bits is not None:
        print(f"tail-bits {out.tail_bits}")
    return 0


def _run_decrypt(args) -> int:
    inst = _instance(args)
    ad = parse_blocks(args.ad, args.ad_bits, inst.n)
    nonce = _nonce(args, inst)
    out = AeOutput(tuple(int(c, 16) for c in args.ct.split(",")), int(args.tag, 16),
                   args.tail_bits)
    try:
        if args.scheme == "marble":
            msg = marble_decrypt(inst, ad, out)
        else:
            msg = decrypt(inst, ad, out, nonce)
    except InvalidTag:
        print("INVALID", file=sys.stderr)
        return 1
    value, nbits = msg.to_bits(inst.n)
    print("msg " + _width_hex(value, nbits))
    print(f"bits {nbits}")
    return 0


def _run_merge(args) -> int:
    reports = []
    for path in args.reports:
        with open(path) as fh:
            reports.append(json.load(fh))
    r = merge_reports(reports)
    _emit(r, args.json)
    print(_summary_attack(r))
    return 0 if r["passed"] else 1


COMMANDS = {
    "attack": _run_attack,
    "verify-period": _run_verify,
    "baseline": _run_baseline,
    "encrypt": _run_encrypt,
    "decrypt": _run_decrypt,
    "report-merge": _run_merge,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UnsupportedCaseError, ValueError) as exc:
        parser.error(str(exc))  # exits with status 2


if __name__ == "__main__":
    sys.exit(main())
