"""Command-line entry point.

Every command prints a ``key=value`` report on stdout.  Attack and verify
commands reach the hidden key only through an oracle: a local oracle reads
the key from ``$CHAOSCRACK_ORACLE_KEY`` or the ``key`` entry of the config
file (``--config`` or ``$CHAOSCRACK_CONFIG``), never from argv.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

from .attacks import run_cpa_attack, run_differential_attack, run_kpa_attack
from .cipher import CipherConfig, decrypt, encrypt
from .eqkey import EquivalentKey, decrypt_with_equivalent
from .errors import AmbiguityError, ChaosCrackError
from .keystream import KEYSTREAM_LENGTH, IntegratorParams, MasterKey
from .oracle import EncryptionOracle, make_local_oracle, make_transcript_oracle, verify_equivalent_key
from .pgm import load_pgm, save_pgm

ENV_KEY = "CHAOSCRACK_ORACLE_KEY"
ENV_CONFIG = "CHAOSCRACK_CONFIG"

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    key: MasterKey | None = None
    integrator: IntegratorParams = IntegratorParams()
    cipher: CipherConfig = CipherConfig()
    seed: int = 0
    oracle_mode: str = "local"
    exchange_dir: Path | None = None
    timeout: float = 60.0
    poll_interval: float = 0.05


def parse_config(text: str) -> CliConfig:
    """Parse a ``key = value`` config file (``#`` starts a comment)."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"config line {lineno}: expected key=value")
        raw[name.strip()] = value.strip()

    known = {"key", "step", "transient_steps", "sample_stride", "shift200", "seed",
             "oracle_mode", "exchange_dir", "timeout", "poll_interval"}
    unknown = set(raw) - known
    if unknown:
        raise UsageError(f"unknown config entries: {sorted(unknown)}")
    try:
        integ = IntegratorParams(
            step=float(raw.get("step", 0.01)),
            transient_steps=int(raw.get("transient_steps", 1000)),
            sample_stride=int(raw.get("sample_stride", 1)),
        )
        shift = raw.get("shift200", "false").lower()
        if shift not in _TRUE | _FALSE:
            raise ValueError(f"shift200 must be a boolean, got {shift!r}")
        cfg = CliConfig(
            key=MasterKey.parse(raw["key"]) if "key" in raw else None,
            integrator=integ,
            cipher=CipherConfig(apply_200_shift=shift in _TRUE),
            seed=int(raw.get("seed", 0)),
            oracle_mode=raw.get("oracle_mode", "local"),
            exchange_dir=Path(raw["exchange_dir"]) if "exchange_dir" in raw else None,
            timeout=float(raw.get("timeout", 60.0)),
            poll_interval=float(raw.get("poll_interval", 0.05)),
        )
    except ValueError as exc:
        raise UsageError(f"config: {exc}") from None
    if cfg.oracle_mode not in ("local", "transcript"):
        raise UsageError(f"oracle_mode must be local or transcript, got {cfg.oracle_mode!r}")
    return cfg


def load_config(args) -> CliConfig:
    path = args.config or os.environ.get(ENV_CONFIG)
    cfg = parse_config(Path(path).read_text()) if path else CliConfig()
    if os.environ.get(ENV_KEY):
        try:
            cfg = replace(cfg, key=MasterKey.parse(os.environ[ENV_KEY]))
        except ValueError as exc:
            raise UsageError(f"{ENV_KEY}: {exc}") from None
    if getattr(args, "shift200", False):
        cfg = replace(cfg, cipher=CipherConfig(apply_200_shift=True))
    if getattr(args, "oracle", None):
        cfg = replace(cfg, oracle_mode=args.oracle)
    if getattr(args, "exchange_dir", None):
        cfg = replace(cfg, exchange_dir=Path(args.exchange_dir))
    if getattr(args, "timeout", None) is not None:
        cfg = replace(cfg, timeout=args.timeout)
    if cfg.oracle_mode == "transcript" and cfg.exchange_dir is None:
        raise UsageError("transcript oracle mode requires an exchange directory")
    return cfg


def parse_geometry(text: str) -> tuple[int, int]:
    try:
        m, n = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"geometry must look like MxN, got {text!r}") from None
    if m < 1 or n < 1:
        raise argparse.ArgumentTypeError("geometry dimensions must be >= 1")
    return m, n


def open_oracle(cfg: CliConfig) -> EncryptionOracle:
    if cfg.oracle_mode == "transcript":
        return make_transcript_oracle(cfg.exchange_dir, cfg.timeout, cfg.poll_interval)
    if cfg.key is None:
        raise UsageError(f"local oracle needs a hidden key via ${ENV_KEY} or the config file")
    return make_local_oracle(cfg.key, cfg.integrator, cfg.cipher)


# commands ----------------------------------------------------------------------------


def _cipher_key(args, cfg: CliConfig) -> MasterKey:
    if args.key:
        try:
            return MasterKey.parse(args.key)
        except ValueError as exc:
            raise UsageError(f"--key: {exc}") from None
    if cfg.key is None:
        raise UsageError("no master key: pass --key or set it in the config")
    return cfg.key


def cmd_crypt(args, cfg: CliConfig, report: dict):
    key = _cipher_key(args, cfg)
    img = load_pgm(args.inp)
    op = encrypt if args.command == "encrypt" else decrypt
    save_pgm(args.out, op(img, key, cfg.integrator, cfg.cipher))
    report.update(height=img.shape[0], width=img.shape[1], shift200=int(cfg.cipher.apply_200_shift))


def _write_key(path, ek: EquivalentKey, report: dict):
    Path(path).write_text(ek.dumps())
    report.update(map_length=ek.base_map.size, coverage=int(ek.coverage.sum()), key_file=path)


def cmd_attack(args, cfg: CliConfig, report: dict):
    started = time.perf_counter()
    if args.kind == "kpa":
        pairs = [(load_pgm(p), load_pgm(c)) for p, c in args.pair]
        result = run_kpa_attack(pairs)
        M, N = result.geometry
        report.update(geometry=f"{M}x{N}", pairs=result.pairs, oracle_queries=0,
                      resolved_fraction=f"{result.resolved_fraction:.6f}",
                      resolved_columns=int(result.map.resolved.sum()),
                      coverage=int(result.coverage.sum()))
        if result.key is None:
            raise AmbiguityError(
                f"{N - int(result.map.resolved.sum())} columns remain ambiguous; no key written")
        _write_key(args.out, result.key, report)
    else:
        M, N = args.geometry
        with open_oracle(cfg) as oracle:
            if args.kind == "diff":
                ek = run_differential_attack(oracle, M, N)
            else:
                ek = run_cpa_attack(oracle, M, N, probe_width=args.probe_width)
            report.update(geometry=f"{M}x{N}", oracle_queries=oracle.queries)
        _write_key(args.out, ek, report)
    report["elapsed_s"] = f"{time.perf_counter() - started:.3f}"


def _load_key(path) -> EquivalentKey:
    return EquivalentKey.loads(Path(path).read_text())


def cmd_apply(args, cfg: CliConfig, report: dict):
    ek = _load_key(args.key)
    cipher = load_pgm(args.inp)
    plain = decrypt_with_equivalent(cipher, ek)
    save_pgm(args.out, plain)
    report.update(height=plain.shape[0], width=plain.shape[1])
    if args.expect:
        expected = load_pgm(args.expect)
        report["mismatches"] = (int((expected != plain).sum()) if expected.shape == plain.shape
                                else expected.size)


def cmd_verify(args, cfg: CliConfig, report: dict):
    ek = _load_key(args.key)
    seed = cfg.seed if args.seed is None else args.seed
    with open_oracle(cfg) as oracle:
        result = verify_equivalent_key(oracle, ek, args.trials, seed)
        queries = oracle.queries
    M, N = result.geometry
    report.update(geometry=f"{M}x{N}", seed=seed, trials=result.trials, oracle_queries=queries)
    for t, m in enumerate(result.mismatches):
        report[f"trial_{t}_mismatches"] = m
    report.update(mismatches=result.total_mismatches, passed=int(result.passed))
    if not result.passed:
        raise VerificationFailed(f"{sum(m > 0 for m in result.mismatches)} of {result.trials} trials failed")


class VerificationFailed(ChaosCrackError):
    pass


# parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"key=value config file (default ${ENV_CONFIG})")

    oracle_opts = argparse.ArgumentParser(add_help=False)
    oracle_opts.add_argument("--oracle", choices=("local", "transcript"))
    oracle_opts.add_argument("--exchange-dir")
    oracle_opts.add_argument("--timeout", type=float)

    parser = argparse.ArgumentParser(prog="chaoscrack", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("encrypt", "decrypt"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--key", help="master key x0,xd0,xdd0")
        p.add_argument("--in", dest="inp", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--shift200", action="store_true")
        p.set_defaults(func=cmd_crypt)

    attack = sub.add_parser("attack")
    kinds = attack.add_subparsers(dest="kind", required=True)
    for kind in ("diff", "cpa"):
        p = kinds.add_parser(kind, parents=[common, oracle_opts])
        p.add_argument("--geometry", type=parse_geometry, required=True, help="MxN, height first")
        p.add_argument("--out", required=True)
        if kind == "cpa":
            p.add_argument("--probe-width", type=int, default=KEYSTREAM_LENGTH)
        p.set_defaults(func=cmd_attack)
    p = kinds.add_parser("kpa", parents=[common])
    p.add_argument("--pair", nargs=2, action="append", required=True, metavar=("PLAIN", "CIPHER"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("apply-eqk", parents=[common])
    p.add_argument("--key", required=True, help="equivalent-key file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--expect", help="reference plaintext; reports pixel mismatches")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("verify", parents=[common, oracle_opts])
    p.add_argument("--key", required=True, help="equivalent-key file")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_verify)
    return parser


def _emit(report: dict, stream=None):
    stream = sys.stdout if stream is None else stream
    for k, v in report.items():
        print(f"{k}={v}", file=stream)
    stream.flush()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command if args.command != "attack" else f"attack-{args.kind}"
    report: dict = {"command": command}
    try:
        cfg = load_config(args)
        args.func(args, cfg, report)
    except UsageError as exc:
        parser.error(str(exc))
    except (ChaosCrackError, OSError, ValueError) as exc:
        report.update(status="error", error=type(exc).__name__, message=str(exc).replace("\n", " "))
        _emit(report)
        return 1
    report["status"] = "ok"
    _emit(report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
