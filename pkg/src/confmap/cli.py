"""Command-line front end for map analysis.

Subcommands: ``classify`` (boundary conformality report), ``profile``
(distortion / Julia / Visser-Ostrowski traces plus the shell-decomposed
deficit integral), ``premodel`` (backward orbit and regularity report),
``kernel-probe`` (reproducing-kernel identity and Gram checks), and
``selftest`` (fast acceptance smoke suite).

Every JSON document embeds the tool version, the seed, and an echo of
the effective configuration; with a fixed configuration the output is
byte-identical across runs.  Exit codes: 0 success, 1 selftest failure,
2 invalid input, 3 inconclusive result, 4 insufficient data.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .boundary import angular_derivative, angular_limit, classify, julia_quotient_profile
from .distortion import hyperbolic_distortion, integral_I, quadrature_selftest, radial_profile
from .dynamics import backward_orbit, boundary_fixed_points, orbit_csv, premodel_analysis
from .geometry import hyperbolic_distance_disk, pseudo_hyperbolic_distance
from .kernel import gram_matrix, normalized_inner_product
from .maps import (
    SelfMap,
    automorphism,
    catalog_map,
    conjugate_to_disk,
    degree_two_blaschke,
    parse,
    parse_constant,
    power_map,
)
from .paths import ApproachPath
from .reporting import csv_table, dumps_canonical

__all__ = [
    "EXIT_INCONCLUSIVE",
    "EXIT_INSUFFICIENT",
    "EXIT_INVALID",
    "EXIT_OK",
    "EXIT_SELFTEST_FAILED",
    "main",
]

EXIT_OK = 0
EXIT_SELFTEST_FAILED = 1
EXIT_INVALID = 2
EXIT_INCONCLUSIVE = 3
EXIT_INSUFFICIENT = 4

DEFAULT_SEED = 20260816

# Error messages carrying these markers signal missing data rather than
# a bad request, and exit with EXIT_INSUFFICIENT.
_INSUFFICIENT_MARKERS = ("too short", "insufficient", "no boundary fixed", "no repulsive")

# Option names each subcommand understands, with its defaults.  None
# means "optional, no default"; required options are checked after the
# config file is merged in.  A config file may hold keys for any
# subcommand; each command picks the ones it knows.
_COMMAND_OPTIONS: dict[str, dict[str, object]] = {
    "classify": {
        "map": None,
        "domain": "disk",
        "sigma": None,
        "conjugate": False,
        "aperture": math.pi / 4.0,
        "start_offset": 0.5,
        "ratio": 0.5,
        "length": 48,
        "seed": DEFAULT_SEED,
        "out": None,
    },
    "profile": {
        "map": None,
        "domain": "disk",
        "sigma": None,
        "conjugate": False,
        "aperture": 0.0,
        "start_offset": 0.5,
        "ratio": 0.5,
        "length": 48,
        "shells": 32,
        "seed": DEFAULT_SEED,
        "out": None,
        "csv_out": None,
        "shell_out": None,
    },
    "premodel": {
        "map": None,
        "domain": "disk",
        "sigma": None,
        "conjugate": False,
        "orbit_start": "0.5",
        "orbit_length": 24,
        "seed": DEFAULT_SEED,
        "out": None,
        "csv_out": None,
    },
    "kernel-probe": {
        "map": None,
        "domain": "disk",
        "points": 8,
        "seed": DEFAULT_SEED,
        "out": None,
        "gram_out": None,
    },
    "selftest": {
        "tolerance": None,
        "json": False,
        "seed": DEFAULT_SEED,
        "out": None,
    },
}

_OPTION_CASTS: dict[str, Callable[[str], object]] = {
    "map": str,
    "domain": str,
    "sigma": str,
    "conjugate": None,  # boolean, handled separately
    "aperture": float,
    "start_offset": float,
    "ratio": float,
    "length": int,
    "shells": int,
    "orbit_start": str,
    "orbit_length": int,
    "points": int,
    "tolerance": float,
    "json": None,
    "seed": int,
    "out": str,
    "csv_out": str,
    "shell_out": str,
    "gram_out": str,
}

_BOOLEAN_OPTIONS = ("conjugate", "json")


# ---------------------------------------------------------------------------
# Configuration plumbing
# ---------------------------------------------------------------------------


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def load_config_file(path: str) -> dict[str, str]:
    """Read a flat ``key = value`` file; '#' starts a comment line."""
    data: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key = key.strip().replace("-", "_")
        if key not in _OPTION_CASTS:
            raise ValueError(f"{path}:{lineno}: unknown option {key!r}")
        data[key] = value.strip()
    return data


def _resolve_config(args: argparse.Namespace) -> dict:
    """Merge CLI flags over the config file over per-command defaults."""
    file_config = load_config_file(args.config) if args.config else {}
    config: dict[str, object] = {"command": args.command}
    for key, default in _COMMAND_OPTIONS[args.command].items():
        value = getattr(args, key, None)
        if key in _BOOLEAN_OPTIONS:
            if not value and key in file_config:
                value = _parse_bool(file_config[key])
            config[key] = bool(value)
            continue
        if value is None and key in file_config:
            cast = _OPTION_CASTS[key]
            try:
                value = cast(file_config[key])
            except ValueError:
                raise ValueError(
                    f"invalid value {file_config[key]!r} for option {key!r}"
                ) from None
        config[key] = default if value is None else value
    return config


# Where a document lands must not change its content, so output paths
# stay out of the config echo.
_ECHO_EXCLUDED = ("out", "csv_out", "shell_out", "gram_out")


def _config_echo(config: dict) -> dict:
    echo = {}
    for key in _COMMAND_OPTIONS[config["command"]]:
        value = config.get(key)
        if value is not None and key not in _ECHO_EXCLUDED:
            echo[key] = value
    return echo


def _document(config: dict, payload: dict) -> dict:
    doc = {
        "version": __version__,
        "command": config["command"],
        "seed": config["seed"],
        "config": _config_echo(config),
    }
    doc.update(payload)
    return doc


def _emit(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_optional(text: str, path: object) -> None:
    if path:
        Path(str(path)).write_text(text)


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _build_map(config: dict) -> SelfMap:
    """Catalog ids contain a colon or are a bare family name; anything
    else is parsed as an expression in the configured domain."""
    text = config.get("map")
    if not text:
        raise ValueError("no map given; pass --map or put 'map = ...' in the config")
    if ":" in text:
        return catalog_map(text)
    try:
        return catalog_map(text)
    except ValueError:
        return parse(text, domain=str(config.get("domain", "disk")))


def _resolve_sigma(config: dict, *, allow_scan: bool) -> complex | str:
    text = config.get("sigma")
    if not text:
        raise ValueError("no sigma given; pass --sigma or put 'sigma = ...' in the config")
    text = str(text)
    if text == "scan":
        if not allow_scan:
            raise ValueError("this command needs a concrete sigma, not 'scan'")
        return "scan"
    value = parse_constant(text)
    if abs(abs(value) - 1.0) > 1e-9:
        raise ValueError(f"sigma must be a unimodular boundary point: {text!r}")
    return value / abs(value)


def _to_disk(m: SelfMap, sigma: complex | str, config: dict) -> SelfMap:
    if m.domain != "half-plane":
        return m
    if not config.get("conjugate"):
        raise ValueError(
            "half-plane maps need --conjugate to analyze at a disk boundary point"
        )
    if sigma == "scan":
        raise ValueError("conjugation needs a concrete sigma, not 'scan'")
    return conjugate_to_disk(m, sigma)


def _disk_points(rng: np.random.Generator, count: int, radius: float = 0.9) -> list[complex]:
    radii = radius * np.sqrt(rng.uniform(0.0, 1.0, size=count))
    angles = rng.uniform(0.0, 2.0 * math.pi, size=count)
    return [complex(r * math.cos(a), r * math.sin(a)) for r, a in zip(radii, angles)]


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------


def cmd_classify(config: dict) -> int:
    m = _build_map(config)
    sigma = _resolve_sigma(config, allow_scan=True)
    m = _to_disk(m, sigma, config)
    kwargs = {
        "aperture": float(config["aperture"]),
        "start_offset": float(config["start_offset"]),
        "ratio": float(config["ratio"]),
        "length": int(config["length"]),
    }
    if sigma == "scan":
        found = boundary_fixed_points(m)
        if not found:
            raise ValueError("no boundary fixed points found by the scan")
        reports = [classify(m, point, **kwargs) for point, _, _ in found]
        payload = {"reports": [r.to_json_dict() for r in reports]}
        inconclusive = any(r.classification == "inconclusive" for r in reports)
    else:
        report = classify(m, sigma, **kwargs)
        payload = {"report": report.to_json_dict()}
        inconclusive = report.classification == "inconclusive"
    _emit(dumps_canonical(_document(config, payload)), config.get("out"))
    return EXIT_INCONCLUSIVE if inconclusive else EXIT_OK


# ---------------------------------------------------------------------------
# profile
# ---------------------------------------------------------------------------


def _vo_samples(
    m: SelfMap, sigma: complex, points: Sequence[complex], omega: complex
) -> list[complex]:
    samples = []
    for z in points:
        value, derivative = m.eval_dual(z)
        denominator = complex(value) - omega
        if abs(denominator) < 1e-15:
            samples.append(complex(math.nan, math.nan))
        else:
            samples.append((z - sigma) * complex(derivative) / denominator)
    return samples


def cmd_profile(config: dict) -> int:
    m = _build_map(config)
    sigma = _resolve_sigma(config, allow_scan=False)
    m = _to_disk(m, sigma, config)
    path = ApproachPath(
        sigma,
        aperture=float(config["aperture"]),
        start_offset=float(config["start_offset"]),
        ratio=float(config["ratio"]),
        length=int(config["length"]),
    )
    prof = radial_profile(m, sigma, path)
    julia, julia_liminf = julia_quotient_profile(m, path)
    omega, confidence = angular_limit(m, path)
    points = [z for z, _ in prof.samples]
    vo = _vo_samples(m, sigma, points, omega)
    profile_csv = csv_table(
        {
            "n": list(range(len(points))),
            "re": [z.real for z in points],
            "im": [z.imag for z in points],
            "r": [abs(z) for z in points],
            "dh": [dh for _, dh in prof.samples],
            "julia": list(julia),
            "vo_re": [v.real for v in vo],
            "vo_im": [v.imag for v in vo],
        }
    )
    estimate = integral_I(m, sigma, int(config["shells"]))
    shell_csv = csv_table(
        {
            "shell": list(range(len(estimate.shells))),
            "contribution": [float(s) for s in estimate.shells],
        }
    )
    payload = {
        "profile": {
            "dh_limit": prof.extrapolated_limit,
            "dh_decided": prof.decided,
            "dh_model": prof.model,
            "julia_liminf": julia_liminf,
            "boundary_value": omega,
            "boundary_confidence": confidence,
            "integral": {
                "value": float(estimate.value),
                "verdict": estimate.verdict,
                "tail_bound": float(estimate.tail_bound),
            },
        },
        "profile_csv": profile_csv,
        "shell_csv": shell_csv,
    }
    _emit(dumps_canonical(_document(config, payload)), config.get("out"))
    _write_optional(profile_csv, config.get("csv_out"))
    _write_optional(shell_csv, config.get("shell_out"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# premodel
# ---------------------------------------------------------------------------


def cmd_premodel(config: dict) -> int:
    m = _build_map(config)
    sigma = _resolve_sigma(config, allow_scan=True)
    m = _to_disk(m, sigma, config)
    z0 = parse_constant(str(config["orbit_start"]))
    length = int(config["orbit_length"])
    if sigma == "scan":
        found = boundary_fixed_points(m)
        targets = [point for point, _, kind in found if kind == "repulsive"]
        if not targets:
            raise ValueError("no repulsive fixed points found by the scan")
    else:
        targets = [sigma]

    entries = []
    undecided = False
    for target in targets:
        orbit = backward_orbit(m, z0, target, length=length)
        report = premodel_analysis(m, orbit)
        undecided = undecided or report.verdict == "undecided"
        entries.append(
            {"report": report.to_json_dict(), "orbit_csv": orbit_csv(orbit, report)}
        )
    if sigma == "scan":
        payload: dict = {"results": entries}
    else:
        payload = entries[0]
    _emit(dumps_canonical(_document(config, payload)), config.get("out"))
    _write_optional(entries[0]["orbit_csv"], config.get("csv_out"))
    return EXIT_INCONCLUSIVE if undecided else EXIT_OK


# ---------------------------------------------------------------------------
# kernel-probe
# ---------------------------------------------------------------------------


def cmd_kernel_probe(config: dict) -> int:
    m = _build_map(config)
    if m.domain != "disk":
        raise ValueError("the kernel probe runs on disk maps")
    count = int(config["points"])
    if not 2 <= count <= 64:
        raise ValueError("points must lie between 2 and 64")
    rng = np.random.default_rng(int(config["seed"]))
    points = _disk_points(rng, count)

    residual = 0.0
    for i in range(count):
        for j in range(i + 1, count):
            z, w = points[i], points[j]
            inner = normalized_inner_product(m, z, w)
            rho_image = pseudo_hyperbolic_distance(complex(m(z)), complex(m(w)))
            rho = pseudo_hyperbolic_distance(z, w)
            lhs = abs(inner) ** 2 * (1.0 - rho_image**2)
            residual = max(residual, abs(lhs - (1.0 - rho**2)))

    gram, psd = gram_matrix(m, points)
    eigenvalues = np.linalg.eigvalsh(gram)
    gram_csv = csv_table(
        {
            "i": [i for i in range(count) for _ in range(count)],
            "j": [j for _ in range(count) for j in range(count)],
            "re": [gram[i, j].real for i in range(count) for j in range(count)],
            "im": [gram[i, j].imag for i in range(count) for j in range(count)],
        }
    )
    payload = {
        "kernel": {
            "points": count,
            "identity_residual_max": residual,
            "gram_psd": bool(psd),
            "gram_min_eigenvalue": float(eigenvalues[0]),
        },
        "gram_csv": gram_csv,
    }
    _emit(dumps_canonical(_document(config, payload)), config.get("out"))
    _write_optional(gram_csv, config.get("gram_out"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------


def _selftest_items(tolerance: float | None, seed: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    items: list[dict] = []

    def check(name: str, measured: float, default_tol: float) -> None:
        tol = default_tol if tolerance is None else tolerance
        items.append(
            {
                "name": name,
                "measured": float(measured),
                "tolerance": float(tol),
                "passed": bool(measured <= tol),
            }
        )

    blaschke = degree_two_blaschke(0.5)
    derivative = angular_derivative(blaschke, 1.0)
    check("blaschke-derivative", abs(complex(derivative) - 4.0) / 4.0, 1e-5)

    estimate = integral_I(blaschke, 1.0, 32)
    check(
        "blaschke-integral",
        abs(estimate.value - (math.log(1.5) + math.log(2.0))),
        1e-5,
    )

    check("quadrature", abs(quadrature_selftest() - 0.5), 1e-10)

    worst = 0.0
    for m in (power_map(2), blaschke, automorphism(0.3)):
        for z, w in zip(_disk_points(rng, 200), _disk_points(rng, 200)):
            contraction = hyperbolic_distance_disk(
                complex(m(z)), complex(m(w))
            ) - hyperbolic_distance_disk(z, w)
            dh = hyperbolic_distortion(m, z)
            worst = max(worst, contraction, dh - 1.0, -dh)
    check("schwarz-pick", max(worst, 0.0), 1e-11)

    worst = 0.0
    for m in (power_map(2), blaschke):
        for z, w in zip(_disk_points(rng, 100), _disk_points(rng, 100)):
            inner = normalized_inner_product(m, z, w)
            rho_image = pseudo_hyperbolic_distance(complex(m(z)), complex(m(w)))
            rho = pseudo_hyperbolic_distance(z, w)
            worst = max(
                worst,
                abs(abs(inner) ** 2 * (1.0 - rho_image**2) - (1.0 - rho**2)),
            )
    check("kernel-identity", worst, 1e-12)

    _, psd = gram_matrix(blaschke, _disk_points(rng, 8))
    check("gram-psd", 0.0 if psd else 1.0, 0.5)

    report = classify(blaschke, 1.0)
    check(
        "classification-strong",
        0.0 if report.classification == "strong" else 1.0,
        0.5,
    )
    constant = parse("0.3 + 0*z", domain="disk")
    report = classify(constant, 1.0)
    check(
        "classification-none",
        0.0 if report.classification == "none" else 1.0,
        0.5,
    )

    m = power_map(2)
    orbit = backward_orbit(m, 0.81, 1.0, length=24)
    premodel = premodel_analysis(m, orbit)
    if premodel.verdict == "regular":
        measured = max(
            abs(premodel.rho_measured - math.log(2.0)),
            abs(premodel.rho_formula - math.log(2.0)),
        )
    else:
        measured = math.inf
    check("premodel-step-limit", measured, 1e-5)
    return items


def cmd_selftest(config: dict) -> int:
    tolerance = config.get("tolerance")
    items = _selftest_items(
        None if tolerance is None else float(tolerance), int(config["seed"])
    )
    failed = [item for item in items if not item["passed"]]
    if config.get("json"):
        payload = {"items": items, "passed": not failed}
        _emit(dumps_canonical(_document(config, payload)), config.get("out"))
    else:
        lines = []
        for item in items:
            status = "ok  " if item["passed"] else "FAIL"
            lines.append(
                f"{status} {item['name']:<24} measured {item['measured']:.3e}"
                f" tolerance {item['tolerance']:.3e}"
            )
        lines.append(f"{len(items) - len(failed)} passed, {len(failed)} failed")
        _emit("\n".join(lines), config.get("out"))
    return EXIT_SELFTEST_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


_HANDLERS: dict[str, Callable[[dict], int]] = {
    "classify": cmd_classify,
    "profile": cmd_profile,
    "premodel": cmd_premodel,
    "kernel-probe": cmd_kernel_probe,
    "selftest": cmd_selftest,
}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key = value file supplying flag defaults")
    sub.add_argument("--seed", type=int, help="seed echoed into reports and used for sampling")
    sub.add_argument("--out", help="write the JSON document to this file instead of stdout")


def _add_map_options(sub: argparse.ArgumentParser, with_sigma: bool = True) -> None:
    sub.add_argument("--map", help="catalog id (e.g. blaschke2:a=0.5) or expression in z / w")
    sub.add_argument("--domain", choices=("disk", "half-plane"), help="domain of an expression map")
    if with_sigma:
        sub.add_argument("--sigma", help="boundary point as a complex literal, or 'scan'")
        sub.add_argument(
            "--conjugate",
            action="store_true",
            help="conjugate a half-plane map to the disk, sending infinity to sigma",
        )


def _add_path_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--aperture", type=float, help="approach angle in (-pi/2, pi/2)")
    sub.add_argument("--start-offset", type=float, dest="start_offset")
    sub.add_argument("--ratio", type=float, help="geometric offset ratio in (0, 1)")
    sub.add_argument("--length", type=int, help="number of path samples")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confmap",
        description="Boundary conformality and backward dynamics of holomorphic self-maps.",
    )
    parser.add_argument(
        "--version", action="version", version=f"confmap {__version__}"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("classify", help="conformality report at a boundary point")
    _add_map_options(sub)
    _add_path_options(sub)
    _add_common(sub)

    sub = commands.add_parser("profile", help="distortion/Julia/VO traces and shell integral")
    _add_map_options(sub)
    _add_path_options(sub)
    sub.add_argument("--shells", type=int, help="unit shells for the deficit integral")
    sub.add_argument("--csv-out", dest="csv_out", help="also write the profile CSV here")
    sub.add_argument("--shell-out", dest="shell_out", help="also write the shell CSV here")
    _add_common(sub)

    sub = commands.add_parser("premodel", help="backward orbit and pre-model regularity")
    _add_map_options(sub)
    sub.add_argument("--orbit-start", dest="orbit_start", help="interior starting point")
    sub.add_argument("--orbit-length", dest="orbit_length", type=int)
    sub.add_argument("--csv-out", dest="csv_out", help="also write the orbit CSV here")
    _add_common(sub)

    sub = commands.add_parser("kernel-probe", help="kernel identity and Gram matrix checks")
    _add_map_options(sub, with_sigma=False)
    sub.add_argument("--points", type=int, help="number of seeded sample points (2..64)")
    sub.add_argument("--gram-out", dest="gram_out", help="also write the Gram CSV here")
    _add_common(sub)

    sub = commands.add_parser("selftest", help="fast acceptance smoke suite")
    sub.add_argument("--tolerance", type=float, help="override every item tolerance")
    sub.add_argument("--json", action="store_true", help="machine-readable summary")
    _add_common(sub)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
        return _HANDLERS[args.command](config)
    except ValueError as exc:
        message = str(exc)
        sys.stderr.write(f"confmap: error: {message}\n")
        lowered = message.lower()
        if any(marker in lowered for marker in _INSUFFICIENT_MARKERS):
            return EXIT_INSUFFICIENT
        return EXIT_INVALID
    except OSError as exc:
        sys.stderr.write(f"confmap: error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())
