"""Command line front end.

Exit codes: 0 proof success, 10 proof failure, 20 no unstable candidate,
1 usage or configuration error, 2 internal error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from decimal import Context, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import certificate as certs
from .eigen import NoUnstableCandidate, default_gamma_tilde, prove_instability
from .numerics import (BranchPoint, NewtonConfig, NoConvergence, StallAtStep, continuation_branch,
                       newton_steady, solution_from_bifurcation, with_d)
from .seqspace import WeightOrder
from .steady import DEFAULT_PARAMS, PARAM_NAMES, ModelParams, SingularJacobian, SteadyX, validate_steady

log = logging.getLogger("crossdiff")

EXIT_OK, EXIT_PROOF_FAILED, EXIT_NO_UNSTABLE, EXIT_USAGE, EXIT_INTERNAL = 0, 10, 20, 1, 2

BRANCH_HEADER = ("d", "v0", "radius", "status")
DIAGRAM_HEADER = ("d", "v0", "status")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# -- configuration ------------------------------------------------------------------------------


def _decimal(x, name: str) -> str:
    s = str(x).strip()
    try:
        Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{name}: {s!r} is not a decimal number") from exc
    return s


def _fraction_to_decimal(q: Fraction) -> str:
    if q == 0:
        return "0"
    ctx = Context(prec=17)
    d = ctx.divide(Decimal(q.numerator), Decimal(q.denominator))
    return format(d.normalize(ctx), "f")


def parse_d_range(spec) -> List[str]:
    """'lo:hi:count' (equally spaced, endpoints included) or an explicit list."""
    if isinstance(spec, (list, tuple)):
        vals = [_decimal(x, "d-range") for x in spec]
    else:
        parts = str(spec).replace(",", ":").split(":")
        if len(parts) != 3:
            raise ConfigError("d-range must look like lo:hi:count")
        lo, hi = Fraction(_decimal(parts[0], "d-range")), Fraction(_decimal(parts[1], "d-range"))
        try:
            count = int(parts[2])
        except ValueError as exc:
            raise ConfigError("d-range count must be an integer") from exc
        if count < 0:
            raise ConfigError("d-range count must be nonnegative")
        if count == 1:
            vals = [_fraction_to_decimal(lo)]
        else:
            vals = [_fraction_to_decimal(lo + (hi - lo) * i / (count - 1)) for i in range(count)]
    vals = sorted(set(vals), key=Fraction)
    if any(Fraction(v) <= 0 for v in vals):
        raise ConfigError("d must be positive")
    return vals


@dataclass
class RunConfig:
    params: Dict[str, str] = field(default_factory=lambda: dict(DEFAULT_PARAMS))
    d: Optional[str] = None
    d_range: Optional[List[str]] = None
    m: int = 500
    nu: str = "1.06"
    n: int = 1000
    gamma: str = "1.0001"
    gamma_tilde: Optional[str] = None
    workers: int = 1
    out: Optional[str] = None
    seed_mode: Optional[int] = None
    seed_sign: int = 1
    reflect: bool = False
    target: Optional[str] = None

    @property
    def nu_f(self) -> float:
        return float(Fraction(self.nu))

    @property
    def gamma_f(self) -> float:
        return float(Fraction(self.gamma))

    def gamma_tilde_f(self, nu: Optional[float] = None) -> float:
        nu = self.nu_f if nu is None else nu
        if self.gamma_tilde is None:
            return default_gamma_tilde(self.gamma_f, nu)
        return float(Fraction(self.gamma_tilde))

    def model(self, d: Optional[str] = None) -> ModelParams:
        d = self.d if d is None else d
        vals = dict(self.params)
        if d is not None:
            vals["d1"] = vals["d2"] = d
        try:
            return ModelParams.from_strings(vals)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def check(self, eigen: bool = False, nu: Optional[str] = None):
        nu_s = self.nu if nu is None else nu
        if not Fraction(nu_s) > 1 or not float(Fraction(nu_s)) > 1:
            raise ConfigError(f"nu must exceed 1, got {nu_s}")
        if self.m < 1:
            raise ConfigError("m must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.seed_sign not in (1, -1):
            raise ConfigError("seed sign must be +1 or -1")
        unknown = set(self.params) - set(PARAM_NAMES)
        if unknown:
            raise ConfigError(f"unknown model parameters: {sorted(unknown)}")
        if eigen:
            if self.n < 2:
                raise ConfigError("n must be at least 2")
            g, nuq = Fraction(self.gamma), Fraction(nu_s)
            gt = Fraction(self.gamma_tilde) if self.gamma_tilde is not None else None
            if not (1 < g < nuq and (gt is None or g < gt < nuq)):
                raise ConfigError("need 1 < gamma < gamma_tilde < nu")
            gf, nuf = self.gamma_f, float(Fraction(nu_s))
            if not 1 < gf < self.gamma_tilde_f(nuf) < nuf:
                raise ConfigError("need 1 < gamma < gamma_tilde < nu")


_INT_FIELDS = {"m", "n", "workers", "seed_mode", "seed_sign"}
_DEC_FIELDS = {"d", "nu", "gamma", "gamma_tilde", "target"}


def load_config(path: Optional[str]) -> Dict[str, object]:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text(), parse_float=str, parse_int=str)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in doc.items()}


def build_config(args: argparse.Namespace) -> RunConfig:
    raw = load_config(getattr(args, "params", None))
    known = {f.name for f in fields(RunConfig)}
    bad = set(raw) - known
    if bad:
        raise ConfigError(f"unknown config keys: {sorted(bad)}")
    for name in known:
        val = getattr(args, name, None)
        if name != "params" and val is not None and val is not False:
            raw[name] = val
    cfg = RunConfig()
    model = dict(DEFAULT_PARAMS)
    for k, v in dict(raw.pop("params", {}) or {}).items():
        model[k] = _decimal(v, k)
    cfg.params = model
    for k, v in raw.items():
        if v is None:
            continue
        if k in _INT_FIELDS:
            try:
                v = int(v)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{k} must be an integer") from exc
        elif k in _DEC_FIELDS:
            v = _decimal(v, k)
        elif k == "d_range":
            v = parse_d_range(v)
        elif k == "reflect":
            v = v in (True, "true", "1", 1)
        setattr(cfg, k, v)
    return cfg


# -- candidates ------------------------------------------------------------------------------------


def read_candidate(path: str, params: ModelParams, nu: float) -> SteadyX:
    """A steady certificate, a JSON object with v, w, p, s, or a .npy vector."""
    p = Path(path)
    try:
        if p.suffix == ".npy":
            return SteadyX.from_vector(np.load(p), params, nu)
        doc = json.loads(p.read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read candidate {path}: {exc}") from exc
    src = doc.get("candidate", doc) if isinstance(doc, dict) else None
    if not isinstance(src, dict) or not all(k in src for k in "vwps"):
        raise ConfigError(f"{path}: candidate needs v, w, p and s")
    arrs = [np.array([float(x) for x in src[k]]) for k in "vwps"]
    m = max(len(a) for a in arrs)
    arrs = [np.concatenate([a, np.zeros(m - len(a))]) for a in arrs]
    return SteadyX(*arrs, params, nu)


def steady_candidate(cfg: RunConfig, d: str, candidate: Optional[str] = None, polish: bool = False) -> SteadyX:
    P = cfg.model(d)
    nu = cfg.nu_f
    if candidate is not None:
        X = read_candidate(candidate, P, nu).padded(cfg.m)
        return newton_steady(X, NewtonConfig(m=cfg.m)) if polish else X
    if cfg.seed_mode is not None:
        return solution_from_bifurcation(d, cfg.seed_mode, cfg.seed_sign, m=cfg.m, nu=nu,
                                         reflected=cfg.reflect, base=cfg.params)
    return newton_steady(SteadyX.homogeneous(P, cfg.m, nu), NewtonConfig(m=cfg.m))


# -- commands ------------------------------------------------------------------------------------------


def _emit(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_validate_steady(args) -> int:
    cfg = build_config(args)
    cfg.check()
    if cfg.d is None:
        raise ConfigError("validate-steady needs --d")
    X = steady_candidate(cfg, cfg.d, args.candidate, args.polish)
    cert = validate_steady(X)
    doc = certs.seal(certs.steady_doc(cert))
    _emit(certs.dumps(doc), cfg.out)
    log.info("d=%s m=%d nu=%s: %s r=%s Y=%.3e Z0=%.3e Z1=%.3e", cfg.d, cert.m, cfg.nu,
             "VALID" if cert.valid else f"FAILED ({cert.failure})", cert.r_min, cert.Y, cert.Z0, cert.Z1)
    return EXIT_OK if cert.valid else EXIT_PROOF_FAILED


def _validate_row(item):
    d, vec, params, nu = item
    X = SteadyX.from_vector(vec, ModelParams.from_strings(params), nu)
    try:
        cert = validate_steady(X)
    except Exception as exc:  # a failed row must not stop the sweep
        return d, X.v0(), None, f"ERROR: {type(exc).__name__}", None
    status = "VALID" if cert.valid else "INVALID"
    return d, X.v0(), cert.r_min if cert.valid else None, status, certs.steady_doc(cert)


def branch_candidates(cfg: RunConfig, ds: Sequence[str], candidate: Optional[str] = None):
    """Follow the branch through the requested d values; None marks points not reached."""
    out: List[Optional[SteadyX]] = []
    prev: Optional[Tuple[float, SteadyX]] = None
    for d in ds:
        try:
            if prev is None:
                X = steady_candidate(cfg, d, candidate, polish=True)
            else:
                d0, X0 = prev
                d1 = float(Fraction(d))
                pts = continuation_branch(BranchPoint(repr(d0), X0, 0.0), (d0, d1), step=abs(d1 - d0),
                                          cfg=NewtonConfig(residual_tol=1e-11, m=cfg.m), min_step=1e-9)
                X = newton_steady(with_d(pts[-1].candidate, d), NewtonConfig(m=cfg.m))
        except (NoConvergence, SingularJacobian, StallAtStep) as exc:
            log.warning("branch lost at d=%s: %s", d, exc)
            out.extend([None] * (len(ds) - len(out)))
            break
        out.append(X)
        prev = (float(Fraction(d)), X)
    return out


def cmd_validate_branch(args) -> int:
    cfg = build_config(args)
    cfg.check()
    ds = cfg.d_range if cfg.d_range is not None else ([cfg.d] if cfg.d is not None else None)
    if ds is None:
        raise ConfigError("validate-branch needs --d-range")
    cands = branch_candidates(cfg, ds, args.candidate) if ds else []
    jobs = [(d, X.to_vector(), X.params.as_dict(), X.nu) for d, X in zip(ds, cands) if X is not None]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_validate_row, jobs))
    else:
        results = [_validate_row(j) for j in jobs]
    by_d = {r[0]: r for r in results}
    rows = []
    for d in ds:
        if d in by_d:
            rows.append(by_d[d])
        else:
            rows.append((d, None, None, "NO_CANDIDATE", None))
    rows.sort(key=lambda r: Fraction(r[0]))
    if args.cert_dir:
        cdir = Path(args.cert_dir)
        cdir.mkdir(parents=True, exist_ok=True)
        for d, _, _, _, doc in rows:
            if doc is not None:
                certs.write(doc, cdir / f"steady_d{d}.json")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BRANCH_HEADER)
    for d, v0, r, status, _ in rows:
        w.writerow([d, certs.fmt(v0) or "", certs.fmt(r) or "", status])
    _emit(buf.getvalue(), cfg.out)
    ok = all(r[3] == "VALID" for r in rows)
    log.info("%d rows, %d VALID", len(rows), sum(r[3] == "VALID" for r in rows))
    return EXIT_OK if ok else EXIT_PROOF_FAILED


def cmd_prove_instability(args) -> int:
    cfg = build_config(args)
    try:
        sdoc = certs.load(args.steady)
    except certs.CertificateError as exc:
        raise ConfigError(f"steady certificate rejected: {exc}") from exc
    verdict = certs.verify_doc(sdoc)
    if sdoc.get("kind") != certs.STEADY or not verdict.ok:
        raise ConfigError(f"steady certificate is not a valid proof: {'; '.join(verdict.reasons)}")
    cfg.nu = sdoc["nu"]
    cfg.check(eigen=True, nu=sdoc["nu"])
    scert, X = certs.steady_from_doc(sdoc)
    gamma, gt = cfg.gamma_f, cfg.gamma_tilde_f(scert.nu)
    target = complex(cfg.target) if cfg.target is not None else None
    try:
        cert, Xe = prove_instability(X, scert.r_min, cfg.n, gamma, gt, target=target)
    except NoUnstableCandidate as exc:
        doc = certs.seal(certs.no_unstable_doc(sdoc, cfg.n, getattr(exc, "lam", None), str(exc)))
        _emit(certs.dumps(doc), cfg.out)
        log.info("no unstable candidate: %s", exc)
        return EXIT_NO_UNSTABLE
    doc = certs.seal(certs.eigen_doc(cert, Xe, sdoc))
    _emit(certs.dumps(doc), cfg.out)
    log.info("lambda=%.6g%+.6gi n=%d: %s r=%s", cert.lambda_re, cert.lambda_im, cert.n,
             "VALID" if cert.valid else f"FAILED ({cert.failure})", cert.r_min)
    return EXIT_OK if cert.valid else EXIT_PROOF_FAILED


def _json_files(paths: Sequence[str]) -> List[Path]:
    files: List[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(sorted(q for q in p.iterdir() if q.suffix == ".json" and q.is_file()))
        elif p.exists():
            files.append(p)
        else:
            raise ConfigError(f"{p} does not exist")
    return files


def _read_all(files: Sequence[Path]):
    docs, bad = [], []
    for f in files:
        try:
            docs.append((f, certs.load(f, check_hash=False)))
        except certs.CertificateError as exc:
            bad.append((f, str(exc)))
    return docs, bad


def cmd_export_diagram(args) -> int:
    d = Path(args.directory)
    if not d.is_dir():
        raise ConfigError(f"{d} is not a directory")
    docs, bad = _read_all(_json_files([str(d)]))
    for f, why in bad:
        log.warning("skipping %s: %s", f, why)
    steady, eig, none_found = {}, set(), set()
    for f, doc in docs:
        verdict = certs.verify_doc(doc)
        if doc["kind"] == certs.STEADY:
            if verdict.ok:
                steady[doc["hash"]] = doc
            else:
                log.warning("skipping %s: %s", f, "; ".join(verdict.reasons))
        elif doc["kind"] == certs.EIGEN and verdict.ok:
            eig.add(doc["steady_hash"])
        elif doc["kind"] == certs.NO_UNSTABLE and verdict.ok:
            none_found.add(doc["steady_hash"])
        elif not verdict.ok:
            log.warning("skipping %s: %s", f, "; ".join(verdict.reasons))
    rows = []
    for h, doc in steady.items():
        status = "proved+unstable" if h in eig else ("proved+no-unstable-found" if h in none_found else "proved")
        rows.append((doc["params"]["d1"], doc["v0"], status))
    rows.sort(key=lambda r: (Fraction(r[0]), float(r[1]), r[2]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DIAGRAM_HEADER)
    w.writerows(rows)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    files = _json_files(args.paths)
    if not files:
        raise ConfigError("no certificate files given")
    extra = _json_files(args.steady or [])
    docs, bad = _read_all(files)
    index = {doc.get("hash"): doc for _, doc in _read_all(list(files) + extra)[0] if doc["kind"] == certs.STEADY}
    ok = not bad
    for f, why in bad:
        print(f"FAIL {f}: {why}")
    for f, doc in docs:
        v = certs.verify_doc(doc, index if doc["kind"] == certs.EIGEN else None)
        ok &= v.ok
        tag = "OK  " if v.ok else "FAIL"
        extra_txt = f" P(r)<={v.p_at_r:.3e}" if v.p_at_r is not None else ""
        reasons = f": {'; '.join(v.reasons)}" if v.reasons else ""
        print(f"{tag} {v.kind} {f}{extra_txt}{reasons}")
    return EXIT_OK if ok else EXIT_PROOF_FAILED


# -- parser ------------------------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, eigen: bool = False):
    p.add_argument("--params", help="JSON run configuration")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--nu", help="weight nu > 1 (decimal)")
    if eigen:
        p.add_argument("--n", type=int, help="eigenproblem truncation")
        p.add_argument("--gamma", help="weight gamma of the eigen space (decimal)")
        p.add_argument("--gamma-tilde", dest="gamma_tilde", help="intermediate weight (default sqrt(gamma nu))")
        p.add_argument("--target", help="validate the eigenvalue nearest this value instead of the largest")
    else:
        p.add_argument("--m", type=int, help="number of Fourier modes")
        p.add_argument("--candidate", help="candidate file (.npy, JSON or steady certificate)")
        p.add_argument("--seed-mode", dest="seed_mode", type=int,
                       help="follow the branch born from this mode at the homogeneous state")
        p.add_argument("--seed-sign", dest="seed_sign", type=int, help="side of the bifurcation (+1/-1)")
        p.add_argument("--reflect", action="store_true", help="use the mirror image x -> 1-x")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crossdiff", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("validate-steady", help="prove a steady state at one d")
    _common(p)
    p.add_argument("--d", help="diffusion d = d1 = d2 (decimal)")
    p.add_argument("--polish", action="store_true", help="run Newton on a supplied candidate first")
    p.set_defaults(func=cmd_validate_steady)

    p = sub.add_parser("validate-branch", help="continue a branch in d and prove every point")
    _common(p)
    p.add_argument("--d", help="single d value")
    p.add_argument("--d-range", dest="d_range", help="lo:hi:count")
    p.add_argument("--workers", type=int, help="parallel validations")
    p.add_argument("--cert-dir", dest="cert_dir", help="also write one certificate per row here")
    p.set_defaults(func=cmd_validate_branch)

    p = sub.add_parser("prove-instability", help="prove an unstable eigenvalue of a proved steady state")
    _common(p, eigen=True)
    p.add_argument("--steady", required=True, help="steady certificate")
    p.set_defaults(func=cmd_prove_instability)

    p = sub.add_parser("export-diagram", help="collect (d, v(0), status) from a certificate directory")
    p.add_argument("directory")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_diagram)

    p = sub.add_parser("verify", help="re-check certificates from their stored bounds")
    p.add_argument("paths", nargs="+")
    p.add_argument("--steady", nargs="*", help="extra steady certificates for reference lookup")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = make_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
        if args.command is None:
            raise ConfigError("a subcommand is required")
        return args.func(args)
    except (ConfigError, WeightOrder) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # contract: anything unexpected is an internal error
        logging.getLogger("crossdiff").exception("internal error")
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
