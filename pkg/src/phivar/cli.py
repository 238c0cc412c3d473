"""Command-line surface: config parsing, orchestration, CSV/JSON/SVG output.

Subcommands map onto the library: variation (one V_{n,t}), study (a level
sweep with the limit attached), limits (moment / coupling / tv), clt
(Wasserstein-1 to normal), path (dyadic sample path export), conditions
(growth-condition report).

Configs parse-then-validate: a run either yields a fully validated plan or
a single error listing every violation.  Runs are reproducible: the same
config and seed produce byte-identical CSV output apart from a timestamp
comment line, which --reproducible suppresses.

Exit codes: 0 success, 2 invalid config, 3 enumeration/runtime cap
exceeded, 4 gauge-domain violation, 1 other errors.  Failures emit a
machine-readable JSON object on stderr.

Config file schema ("phivar/1") mirrors the flags::

    {"schema": "phivar/1", "command": "variation",
     "scheme": {"kind": "takagi"}, "signs": {"kind": "classic"},
     "gauge": {"phi": {"q": 0, "g": "pow:1"}}, "n": 16, "mode": "binomial"}

Scheme grammar (CLI): takagi | faber | geometric:a=A | explicit:alphas=V;V;...
| prescribed-q:q=Q,g=EXPR | prescribed-q0:g=EXPR, with optional
maxlevel=M.  Sign grammar: classic | random:seed=S.  Gauge grammar:
power:P | phi:q=Q,g=EXPR.  g-expressions: const:C, pow:RHO, spow:RHO,
logpow:KAPPA, mul(e1,e2,...).
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CapExceededError, ConfigError, GaugeDomainError, PhivarError
from .regvar import PhiFunction, RegularlyVaryingFn, parse_g
from .scheme import CoefficientScheme, check_conditions
from .dyadic import SignField, gen_path
from .variation import (convergence_study, gauge_label, theoretical_limit,
                        variation_binomial, variation_enumerate, variation_mc)
from .limits import (ConvolutionSpec, clt_distance, coupling_distance,
                     moment_Z, total_variation_expectation)

SCHEMA = "phivar/1"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAP = 3
EXIT_GAUGE = 4


# -- small grammar helpers ---------------------------------------------------


def _split_top_level(s: str, sep: str = ",") -> list:
    """Split on sep outside parentheses (g-expressions contain commas)."""
    parts, depth, cur = [], 0, []
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p for p in parts if p]


def _parse_kv(body: str) -> dict:
    out = {}
    for item in _split_top_level(body):
        if "=" not in item:
            raise ConfigError([f"expected key=value, got {item!r}"])
        k, _, v = item.partition("=")
        out[k.strip()] = v.strip()
    return out


def parse_scheme_spec(text: str) -> dict:
    """CLI scheme string -> config dict (the JSON form)."""
    head, _, body = text.partition(":")
    kv = _parse_kv(body) if body else {}
    d = {"kind": head}
    if "maxlevel" in kv:
        d["max_level"] = int(kv.pop("maxlevel"))
    if head in ("takagi", "faber"):
        pass
    elif head == "geometric":
        if "a" not in kv:
            raise ConfigError(["geometric scheme needs a=RATIO"])
        d["a"] = float(kv.pop("a"))
    elif head == "explicit":
        if "alphas" not in kv:
            raise ConfigError(["explicit scheme needs alphas=V;V;..."])
        d["alphas"] = [float(x) for x in kv.pop("alphas").split(";") if x]
    elif head == "prescribed-q":
        if "q" not in kv or "g" not in kv:
            raise ConfigError(["prescribed-q scheme needs q=Q,g=EXPR"])
        d["q"] = float(kv.pop("q"))
        d["g"] = kv.pop("g")
    elif head == "prescribed-q0":
        if "g" not in kv:
            raise ConfigError(["prescribed-q0 scheme needs g=EXPR"])
        d["g"] = kv.pop("g")
    else:
        raise ConfigError([f"unknown scheme kind {head!r}"])
    if kv:
        raise ConfigError([f"unknown scheme option(s): {sorted(kv)}"])
    return d


def scheme_from_dict(d: dict) -> CoefficientScheme:
    kind = d.get("kind")
    ml = int(d.get("max_level", 0)) or None
    try:
        if kind == "takagi":
            return CoefficientScheme.takagi(ml or 64)
        if kind == "faber":
            return CoefficientScheme.faber(ml or 720)
        if kind == "geometric":
            return CoefficientScheme.geometric(float(d["a"]), ml or 64)
        if kind == "explicit":
            return CoefficientScheme.explicit([float(x) for x in d["alphas"]])
        if kind == "prescribed-q":
            return CoefficientScheme.prescribed(float(d["q"]), parse_g(d["g"]), ml or 64)
        if kind == "prescribed-q0":
            return CoefficientScheme.prescribed_q0(parse_g(d["g"]), ml or 64)
    except KeyError as exc:
        raise ConfigError([f"scheme config missing field {exc}"]) from None
    raise ConfigError([f"unknown scheme kind {kind!r}"])


def parse_signs_spec(text: str) -> dict:
    head, _, body = text.partition(":")
    kv = _parse_kv(body) if body else {}
    if head == "classic":
        return {"kind": "classic"}
    if head == "random":
        if "seed" not in kv:
            raise ConfigError(["random signs need seed=S"])
        return {"kind": "random", "seed": int(kv["seed"])}
    raise ConfigError([f"unknown sign field {head!r} (rule fields are library-only)"])


def signs_from_dict(d: dict) -> SignField:
    kind = d.get("kind", "classic")
    if kind == "classic":
        return SignField.classic()
    if kind == "random":
        return SignField.random(int(d["seed"]))
    raise ConfigError([f"unknown sign field kind {kind!r}"])


def parse_gauge_spec(text: str) -> dict:
    head, _, body = text.partition(":")
    if head == "power":
        return {"power": float(body)}
    if head == "phi":
        kv = _parse_kv(body)
        if "q" not in kv or "g" not in kv:
            raise ConfigError(["phi gauge needs q=Q,g=EXPR"])
        return {"phi": {"q": float(kv["q"]), "g": kv["g"]}}
    raise ConfigError([f"unknown gauge {head!r}"])


def gauge_from_dict(d: dict):
    if "power" in d:
        return float(d["power"])
    if "phi" in d:
        return PhiFunction(float(d["phi"]["q"]), parse_g(d["phi"]["g"]))
    raise ConfigError([f"bad gauge config {d!r}"])


# -- run configuration ---------------------------------------------------------


_CONFIG_FIELDS = ("command", "scheme", "signs", "gauge", "n", "n_list", "t",
                  "mode", "samples", "seed", "level", "tolerance", "quantity",
                  "method", "q", "r", "b", "L", "ell", "depth", "threads",
                  "out_csv", "out_json", "out_svg", "out_bin", "reproducible")

_COMMANDS = ("variation", "study", "limits", "clt", "path", "conditions")


@dataclass
class RunConfig:
    command: str = ""
    scheme: Optional[dict] = None
    signs: dict = field(default_factory=lambda: {"kind": "classic"})
    gauge: Optional[dict] = None
    n: Optional[int] = None
    n_list: Optional[list] = None
    t: float = 1.0
    mode: str = "auto"
    samples: int = 10 ** 5
    seed: int = 0
    level: Optional[int] = None
    tolerance: float = 1e-12
    quantity: Optional[str] = None
    method: Optional[str] = None
    q: Optional[float] = None
    r: Optional[float] = None
    b: Optional[float] = None
    L: Optional[str] = None
    ell: Optional[str] = None
    depth: Optional[int] = None
    threads: Optional[int] = None
    out_csv: Optional[str] = None
    out_json: Optional[str] = None
    out_svg: Optional[str] = None
    out_bin: Optional[str] = None
    reproducible: bool = False

    def to_dict(self) -> dict:
        out = {"schema": SCHEMA}
        defaults = RunConfig()
        for f_ in _CONFIG_FIELDS:
            v = getattr(self, f_)
            if v != getattr(defaults, f_):
                out[f_] = v
        return out

    @staticmethod
    def from_dict(doc: dict) -> "RunConfig":
        doc = dict(doc)
        schema = doc.pop("schema", SCHEMA)
        if schema != SCHEMA:
            raise ConfigError([f"unsupported config schema {schema!r}"])
        unknown = set(doc) - set(_CONFIG_FIELDS)
        if unknown:
            raise ConfigError([f"unknown config field(s): {sorted(unknown)}"])
        return RunConfig(**doc)

    # -- validation ----------------------------------------------------------

    def validate(self):
        """Full parse-then-validate pass; aggregates every violation."""
        errs = []
        if self.command not in _COMMANDS:
            errs.append(f"unknown command {self.command!r}")
        needs_scheme = self.command in ("variation", "study", "clt", "path",
                                        "conditions") or \
            (self.command == "limits" and self.quantity in ("coupling", "tv"))
        scheme = signs = gauge = None
        if needs_scheme:
            if self.scheme is None:
                errs.append(f"command {self.command!r} needs a scheme")
            else:
                try:
                    scheme = scheme_from_dict(self.scheme)
                except (ConfigError, PhivarError) as exc:
                    errs.append(f"bad scheme: {exc}")
        try:
            signs = signs_from_dict(self.signs)
        except (ConfigError, PhivarError) as exc:
            errs.append(f"bad sign field: {exc}")
        if self.command in ("variation", "study"):
            if self.gauge is None:
                errs.append(f"command {self.command!r} needs a gauge")
            else:
                try:
                    gauge = gauge_from_dict(self.gauge)
                except (ConfigError, PhivarError) as exc:
                    errs.append(f"bad gauge: {exc}")
        if self.command == "variation" and self.n is None:
            errs.append("variation needs --n")
        if self.command == "study" and not self.n_list:
            errs.append("study needs --n-list")
        if self.command == "clt" and self.n is None and not self.n_list:
            errs.append("clt needs --n or --n-list")
        if self.command == "path":
            if self.level is None:
                errs.append("path needs --level")
            elif self.level < 1:
                errs.append("path level must be >= 1")
        if self.command == "limits":
            if self.quantity not in ("moment", "coupling", "tv"):
                errs.append("limits needs --quantity moment|coupling|tv")
            if self.quantity == "moment":
                if self.q is None or not self.q > 0:
                    errs.append("limits moment needs --q > 0")
                if self.r is None or self.r < 1:
                    errs.append("limits moment needs --r >= 1")
            if self.quantity == "coupling":
                if self.q is None or not self.q > 0:
                    errs.append("limits coupling needs --q > 0")
                if self.n is None and not self.n_list:
                    errs.append("limits coupling needs --n or --n-list")
        if self.command == "conditions":
            if self.q is None or self.q < 0:
                errs.append("conditions needs --q >= 0")
            if self.b is None or not self.b > 1:
                errs.append("conditions needs --b > 1")
            if self.L is None and self.ell is None:
                errs.append("conditions needs --L or --ell")
            if not self.n_list and self.n is None:
                errs.append("conditions needs --nmax or --n-list")
        if not (0.0 <= self.t <= 1.0):
            errs.append("t must lie in [0, 1]")
        if self.mode not in ("auto", "binomial", "enumerate", "mc"):
            errs.append(f"unknown mode {self.mode!r}")
        if self.samples < 100:
            errs.append("samples must be >= 100")
        if self.tolerance <= 0:
            errs.append("tolerance must be positive")
        if errs:
            raise ConfigError(errs)
        return scheme, signs, gauge


# -- output writers ---------------------------------------------------------


def _write_csv(path: str, header: str, rows: list, reproducible: bool,
               command: str) -> None:
    with open(path, "w") as fh:
        if not reproducible:
            stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
            fh.write(f"# phivar {command} generated {stamp}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join("" if v is None else f"{v:.17g}"
                              if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def _write_json(path: str, config: RunConfig, results: list) -> None:
    doc = {"schema": SCHEMA, "config": config.to_dict(), "results": results}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_result_json(path: str):
    """Re-parse an emitted JSON record into (RunConfig, results)."""
    with open(path) as fh:
        doc = json.load(fh)
    cfg_doc = dict(doc["config"])
    cfg_doc.setdefault("schema", doc.get("schema", SCHEMA))
    return RunConfig.from_dict(cfg_doc), doc["results"]


_SVG_W, _SVG_H = 960, 540
_SVG_MARGIN = 50
_SVG_MAX_POINTS = 8192


def _write_svg(path: str, xs, ys, title: str, limit: Optional[float] = None) -> None:
    """Hand-rolled polyline chart, fixed 960x540 viewBox, <= 8192 points."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) > _SVG_MAX_POINTS:
        stride = int(math.ceil(len(xs) / _SVG_MAX_POINTS))
        xs, ys = xs[::stride], ys[::stride]
    x0, x1 = float(xs.min()), float(xs.max())
    ylo = min(float(ys.min()), limit if limit is not None else ys.min())
    yhi = max(float(ys.max()), limit if limit is not None else ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if yhi == ylo:
        yhi = ylo + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad
    iw = _SVG_W - 2 * _SVG_MARGIN
    ih = _SVG_H - 2 * _SVG_MARGIN

    def sx(x):
        return _SVG_MARGIN + iw * (x - x0) / (x1 - x0)

    def sy(y):
        return _SVG_H - _SVG_MARGIN - ih * (y - ylo) / (yhi - ylo)

    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect x="0" y="0" width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<rect x="{_SVG_MARGIN}" y="{_SVG_MARGIN}" width="{iw}" height="{ih}" '
        'fill="none" stroke="#888" stroke-width="1"/>',
        f'<text x="{_SVG_MARGIN}" y="{_SVG_MARGIN - 12}" font-family="monospace" '
        f'font-size="14">{title}</text>',
        f'<text x="{_SVG_MARGIN}" y="{_SVG_H - 10}" font-family="monospace" '
        f'font-size="11">x: [{x0:g}, {x1:g}]  y: [{ylo:g}, {yhi:g}]</text>',
    ]
    if limit is not None:
        y = sy(limit)
        lines.append(f'<line x1="{_SVG_MARGIN}" y1="{y:.2f}" '
                     f'x2="{_SVG_W - _SVG_MARGIN}" y2="{y:.2f}" '
                     'stroke="#c33" stroke-width="1" stroke-dasharray="6,4"/>')
    lines.append(f'<polyline points="{pts}" fill="none" stroke="#226" '
                 'stroke-width="1.2"/>')
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# -- command execution --------------------------------------------------------


_VAR_HEADER = "n,t,mode,value,stderr,limit,deviation"


def _variation_rows(reports):
    return [(r.n, r.t, r.mode, r.value, r.stderr, r.limit, r.deviation)
            for r in reports]


def run(config: RunConfig) -> int:
    """Execute a validated run plan and write its artifacts."""
    scheme, signs, gauge = config.validate()
    results = []
    csv_rows, csv_header = [], _VAR_HEADER
    svg_data = None

    if config.command == "variation":
        limit = theoretical_limit(scheme, gauge, config.t)
        rep = _dispatch_variation(config, scheme, signs, gauge)
        rep.limit = limit
        rep.deviation = rep.value - limit if limit is not None else None
        results = [rep.to_dict()]
        csv_rows = _variation_rows([rep])

    elif config.command == "study":
        study = convergence_study(scheme, signs, gauge, config.n_list, config.t,
                                  config.mode, config.samples, config.seed,
                                  config.threads)
        results = study.rows()
        csv_rows = _variation_rows(study.reports)
        svg_data = ([r.n for r in study.reports],
                    [r.value for r in study.reports],
                    f"{gauge_label(gauge)} value vs n", study.limit)

    elif config.command == "limits":
        results, csv_header, csv_rows = _run_limits(config, scheme)

    elif config.command == "clt":
        ns = config.n_list or [config.n]
        csv_header = "n,w1"
        for n in ns:
            w1 = clt_distance(scheme, int(n))
            results.append({"quantity": "clt-w1", "n": int(n), "value": w1})
            csv_rows.append((int(n), w1))
        svg_data = ([r[0] for r in csv_rows], [r[1] for r in csv_rows],
                    "W1 distance to normal vs n", None)

    elif config.command == "path":
        p = gen_path(scheme, signs, config.level, config.tolerance)
        results = [{"quantity": "path", "level": p.level,
                    "scheme": p.scheme_id, "signs": p.signfield_id,
                    "points": len(p.values)}]
        csv_header = "t,value"
        ts = p.times()
        csv_rows = list(zip(ts.tolist(), p.values.tolist()))
        if config.out_bin:
            p.to_binary(config.out_bin)
        svg_data = (ts, p.values, "path value vs t", None)

    elif config.command == "conditions":
        ns = config.n_list or list(range(1, int(config.n) + 1))
        L = parse_g(config.L) if config.L else None
        ell = parse_g(config.ell) if config.ell else None
        rep = check_conditions(scheme, config.q, config.b, ns, L=L, ell=ell)
        results = [{"quantity": "conditions", "q": rep.q, "b": rep.b,
                    "verdicts": rep.verdicts, "ratio_last": rep.ratio_last,
                    "ratio_target": rep.ratio_target,
                    "ratios_beta": rep.ratios_beta, "ratios_s": rep.ratios_s}]
        csv_header = "n,beta_ratio,s_ratio"
        beta_by_n = dict(rep.ratios_beta)
        for n, s_ratio in rep.ratios_s:
            csv_rows.append((n, beta_by_n.get(n), s_ratio))
        print("verdicts:", json.dumps(rep.verdicts))

    if config.out_csv:
        _write_csv(config.out_csv, csv_header, csv_rows, config.reproducible,
                   config.command)
    if config.out_json:
        _write_json(config.out_json, config, results)
    if config.out_svg and svg_data is not None:
        _write_svg(config.out_svg, svg_data[0], svg_data[1], svg_data[2],
                   svg_data[3])
    if not (config.out_csv or config.out_json or config.out_svg):
        json.dump(results, sys.stdout, indent=2, sort_keys=True, default=str)
        sys.stdout.write("\n")
    return EXIT_OK


def _dispatch_variation(config, scheme, signs, gauge):
    mode = config.mode
    if mode == "auto":
        betas = scheme.betas(config.n)
        if signs.is_classic and config.t == 1.0 and np.all(betas == betas[0]):
            mode = "binomial"
        else:
            mode = "enumerate" if config.n <= 26 else "mc"
    if mode == "binomial":
        return variation_binomial(scheme, gauge, config.n, config.t)
    if mode == "enumerate":
        return variation_enumerate(scheme, signs, gauge, config.n, config.t,
                                   config.threads)
    return variation_mc(scheme, signs, gauge, config.n, config.t,
                        config.samples, config.seed)


def _run_limits(config, scheme):
    header = "quantity,value,error_low,error_high"
    if config.quantity == "moment":
        depth = config.depth or 20
        spec = ConvolutionSpec(q=config.q, depth=depth)
        method = config.method or "enum"
        est = moment_Z(spec, config.r, method=method, samples=config.samples,
                       seed=config.seed)
        rec = est.to_dict()
        rec.update({"quantity": "moment", "seed": config.seed, "depth": depth,
                    "q": config.q, "r": config.r})
        return [rec], header, [("moment", est.value, est.lo, est.hi)]
    if config.quantity == "coupling":
        ns = config.n_list or [config.n]
        rows, recs = [], []
        for n in ns:
            rep = coupling_distance(scheme, config.q, int(n))
            recs.append({"quantity": "coupling", "n": rep.n,
                         "value": rep.exact_l2, "q": config.q})
            rows.append((f"coupling(n={rep.n})", rep.exact_l2, None, None))
        return recs, header, rows
    # tv
    est = total_variation_expectation(scheme, method=config.method or "enum",
                                      depth=config.depth or 20,
                                      samples=config.samples, seed=config.seed)
    rec = est.to_dict()
    rec.update({"quantity": "tv", "seed": config.seed})
    return [rec], header, [("tv", est.value, est.lo, est.hi)]


# -- argparse ---------------------------------------------------------------


def _add_common(p):
    p.add_argument("--config", help="JSON config file (overrides other flags)")
    p.add_argument("--scheme", help="scheme spec, e.g. takagi or geometric:a=0.5")
    p.add_argument("--signs", default="classic",
                   help="sign field: classic | random:seed=S")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: PHIVAR_THREADS or all cores)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=10 ** 5)
    p.add_argument("--out-csv")
    p.add_argument("--out-json")
    p.add_argument("--out-svg")
    p.add_argument("--reproducible", action="store_true",
                   help="suppress the timestamp comment line in CSV output")


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="phivar",
        description="Phi-variation of Takagi-class functions along dyadic partitions")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("variation", help="one partial variation sum V_{n,t}")
    _add_common(p)
    p.add_argument("--gauge", help="power:P or phi:q=Q,g=EXPR")
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--mode", default="auto",
                   choices=["auto", "binomial", "enumerate", "mc"])

    p = sub.add_parser("study", help="variation across a list of levels")
    _add_common(p)
    p.add_argument("--gauge")
    p.add_argument("--n-list", help="comma-separated levels, e.g. 4,8,12")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--mode", default="auto",
                   choices=["auto", "binomial", "enumerate", "mc"])

    p = sub.add_parser("limits", help="moment / coupling / total variation")
    _add_common(p)
    p.add_argument("--quantity", choices=["moment", "coupling", "tv"])
    p.add_argument("--q", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--method", choices=["enum", "mc"])
    p.add_argument("--depth", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--n-list")

    p = sub.add_parser("clt", help="Wasserstein-1 distance to the normal law")
    _add_common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--n-list")

    p = sub.add_parser("path", help="export a dyadic sample path")
    _add_common(p)
    p.add_argument("--level", type=int)
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.add_argument("--out-bin", help="binary path export (PHIVPATH format)")

    p = sub.add_parser("conditions", help="growth-condition report")
    _add_common(p)
    p.add_argument("--q", type=float)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--L", help="slowly varying L expression")
    p.add_argument("--ell", help="slowly varying ell expression (skips the integral)")
    p.add_argument("--nmax", type=int)
    p.add_argument("--n-list")

    return ap


def _config_from_args(args) -> RunConfig:
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        doc.setdefault("command", args.command)
        return RunConfig.from_dict(doc)
    cfg = RunConfig(command=args.command)
    cfg.signs = parse_signs_spec(args.signs)
    cfg.threads = args.threads
    cfg.seed = args.seed
    cfg.samples = args.samples
    cfg.out_csv = args.out_csv
    cfg.out_json = args.out_json
    cfg.out_svg = args.out_svg
    cfg.reproducible = args.reproducible
    if getattr(args, "scheme", None):
        cfg.scheme = parse_scheme_spec(args.scheme)
    if getattr(args, "gauge", None):
        cfg.gauge = parse_gauge_spec(args.gauge)
    for name in ("n", "t", "mode", "level", "tolerance", "quantity", "method",
                 "q", "r", "b", "L", "ell", "depth"):
        if hasattr(args, name) and getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    nl = getattr(args, "n_list", None)
    if nl:
        cfg.n_list = [int(x) for x in nl.split(",") if x]
    if args.command == "conditions" and getattr(args, "nmax", None):
        cfg.n = args.nmax
    if hasattr(args, "out_bin") and args.out_bin:
        cfg.out_bin = args.out_bin
    return cfg


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        config = _config_from_args(args)
        return run(config)
    except ConfigError as exc:
        _emit_error("config", str(exc), violations=exc.violations)
        return EXIT_CONFIG
    except CapExceededError as exc:
        _emit_error("cap", str(exc))
        return EXIT_CAP
    except GaugeDomainError as exc:
        _emit_error("gauge-domain", str(exc))
        return EXIT_GAUGE
    except PhivarError as exc:
        _emit_error("error", str(exc))
        return 1


def _emit_error(kind: str, message: str, violations=None) -> None:
    doc = {"error": kind, "message": message}
    if violations:
        doc["violations"] = violations
    json.dump(doc, sys.stderr)
    sys.stderr.write("\n")


if __name__ == "__main__":
    sys.exit(main())
