"""Command-line client for the branchlab service.

The CLI is a thin HTTP client: every subcommand builds a JSON request,
posts it to the service, and writes the returned artifacts (CSV tables,
estimate JSONs, a manifest) to the output directory.  By default the
request is served by an in-process application instance over an ASGI
transport, so no server or network is needed; pass --server URL to talk
to a running instance (start one with `branchlab serve`).

Configuration is flat key=value text with dotted namespaces, e.g.

    params.theta=10
    sim.h_max=0.05
    gamma_grid.start=0

loaded via --config FILE; individual --set key=value pairs and the
dedicated flags override file values.  Exit codes: 0 success, 1
validation error, 2 population cap exceeded or degenerate importance
weights, 3 verification-suite failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import httpx

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CAP_OR_DEGENERATE = 2
EXIT_VERIFY_FAILED = 3


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    # in-process ASGI transport: the CLI stays a pure HTTP client but no
    # server or network is needed
    from fastapi.testclient import TestClient

    from .service import app  # deferred: keeps --help fast

    return TestClient(app)


def _parse_value(text: str) -> Any:
    low = text.strip()
    if low.lower() in ("true", "false"):
        return low.lower() == "true"
    try:
        return json.loads(low)
    except json.JSONDecodeError:
        return low


def load_config_file(path: str) -> dict[str, Any]:
    """Flat key=value lines; blank lines and #-comments ignored."""
    flat: dict[str, Any] = {}
    for ln in Path(path).read_text().splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if "=" not in ln:
            raise ValueError(f"bad config line (need key=value): {ln!r}")
        key, val = ln.split("=", 1)
        flat[key.strip()] = _parse_value(val)
    return flat


def unflatten(flat: dict[str, Any]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, val in flat.items():
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = val
    return out


def _grid(text: str) -> dict[str, float]:
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"grid must be start:stop:step, got {text!r}") from exc
    return {"start": start, "stop": stop, "step": step}


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--server", help="service URL (default: in-process)")
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override any request field (dotted namespaces)")
    sub.add_argument("--out", default=".", help="artifact output directory")
    sub.add_argument("--seed", type=int, help="base seed")
    for name in ("theta", "a", "r", "rho"):
        sub.add_argument(f"--{name}", type=float, help=f"model parameter {name}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="branchlab",
                                 description="typed branching diffusion laboratory")
    sp = ap.add_subparsers(dest="command", required=True)

    serve = sp.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    rates = sp.add_parser("rates", help="growth-rate table over a (gamma, kappa) grid")
    _add_common(rates)
    rates.add_argument("--gamma-grid", type=_grid, help="start:stop:step")
    rates.add_argument("--kappa-grid", type=_grid, help="start:stop:step")

    pth = sp.add_parser("paths", help="optimal ascent path samples")
    _add_common(pth)
    pth.add_argument("--beta", type=float)
    pth.add_argument("--kappa", type=float)
    pth.add_argument("--t", type=float)
    pth.add_argument("--tau", type=float)

    sim = sp.add_parser("simulate", help="forward Monte Carlo snapshots")
    _add_common(sim)
    sim.add_argument("--replicas", type=int)
    sim.add_argument("--times", help="comma-separated snapshot times")

    mart = sp.add_parser("martingale", help="additive-martingale series")
    _add_common(mart)
    mart.add_argument("--replicas", type=int)
    mart.add_argument("--lams", help="comma-separated lambda values")
    mart.add_argument("--times", help="comma-separated snapshot times")

    spn = sp.add_parser("spine", help="spine traces and importance estimates")
    _add_common(spn)
    spn.add_argument("--mode", choices=("trace", "importance", "climb"),
                     default="trace")
    spn.add_argument("--replicas", type=int)
    spn.add_argument("--lam", type=float)
    spn.add_argument("--tau", type=float)
    spn.add_argument("--t", type=float)
    spn.add_argument("--beta", type=float)
    spn.add_argument("--kappa", type=float)
    spn.add_argument("--level", type=float)

    bd = sp.add_parser("birthdeath", help="birth-death outcome law and simulation")
    _add_common(bd)
    bd.add_argument("--schedule", choices=("constant", "ascent"))
    bd.add_argument("--replicas", type=int)
    bd.add_argument("--birth", type=float)
    bd.add_argument("--death", type=float)
    bd.add_argument("--horizon", type=float)
    bd.add_argument("--t", type=float)

    orc = sp.add_parser("oracle", help="single-particle expectation estimators")
    _add_common(orc)
    orc.add_argument("--estimator", choices=("many_to_one", "transformed", "population"))
    orc.add_argument("--f", help="function spec (one, indicator_y:lo,hi, gauss_xy, const:c)")
    orc.add_argument("--lam", type=float)
    orc.add_argument("--t", type=float)
    orc.add_argument("--replicas", type=int)

    ver = sp.add_parser("verify", help="run a verification suite")
    _add_common(ver)
    ver.add_argument("--suite", default="closed-form",
                     choices=("closed-form", "paths", "oracle", "martingale",
                              "birthdeath", "spine", "growth", "all"))
    ver.add_argument("--scale", type=float, help="replica scale factor (<1 underpowered)")
    return ap


def _collect_flat(args: argparse.Namespace, mapping: dict[str, str]) -> dict[str, Any]:
    """Flat request fields from config file, then --set, then flags."""
    flat: dict[str, Any] = {}
    if args.config:
        flat.update(load_config_file(args.config))
    for item in args.set:
        if "=" not in item:
            raise ValueError(f"--set needs KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        flat[key.strip()] = _parse_value(val)
    for attr, key in mapping.items():
        val = getattr(args, attr, None)
        if val is not None:
            flat[key] = val
    for name in ("theta", "a", "r", "rho"):
        val = getattr(args, name, None)
        if val is not None:
            flat[f"params.{name}"] = val
    if args.seed is not None:
        flat["seed"] = args.seed
    return flat


def _request_body(flat: dict[str, Any]) -> dict[str, Any]:
    body = unflatten(flat)
    for grid_key in ("gamma_grid", "kappa_grid"):
        if grid_key in body and isinstance(body[grid_key], dict):
            pass  # already nested {start, stop, step}
    return body


def _csv_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _write(out_dir: Path, name: str, content: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(content)
    return path


def _post(client: httpx.Client, endpoint: str, body: dict) -> dict:
    resp = client.post(endpoint, json=body)
    if resp.status_code == 422:
        raise SystemExit(_fail(f"validation error: {resp.text}", EXIT_VALIDATION))
    resp.raise_for_status()
    return resp.json()


def _fail(msg: str, code: int) -> int:
    print(f"branchlab: {msg}", file=sys.stderr)
    return code


def _emit_manifest(out_dir: Path, name: str, payload: dict):
    _write(out_dir, f"{name}_manifest.json",
           json.dumps(payload.get("manifest", {}), indent=2, sort_keys=True) + "\n")


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the contract wants 1
        return EXIT_VALIDATION if exc.code not in (0, None) else 0

    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    out_dir = Path(args.out)
    try:
        with _client(args.server) as client:
            return _dispatch(args, client, out_dir)
    except SystemExit as exc:
        return int(exc.code)
    except (ValueError, OSError) as exc:
        return _fail(str(exc), EXIT_VALIDATION)


def _dispatch(args: argparse.Namespace, client: httpx.Client, out_dir: Path) -> int:
    cmd = args.command
    if cmd == "rates":
        flat = _collect_flat(args, {})
        if args.gamma_grid:
            for k, v in args.gamma_grid.items():
                flat[f"gamma_grid.{k}"] = v
        if args.kappa_grid:
            for k, v in args.kappa_grid.items():
                flat[f"kappa_grid.{k}"] = v
        payload = _post(client, "/rates", _request_body(flat))
        path = _write(out_dir, "rates.csv", payload["csv"])
        _emit_manifest(out_dir, "rates", payload)
        print(f"wrote {path}")
        return EXIT_OK

    if cmd == "paths":
        flat = _collect_flat(args, {"beta": "beta", "kappa": "kappa",
                                    "t": "t", "tau": "tau"})
        payload = _post(client, "/paths", _request_body(flat))
        path = _write(out_dir, "paths.csv", payload["csv"])
        _emit_manifest(out_dir, "paths", payload)
        print(f"wrote {path} (tau={payload['tau']:.6g}, lambda={payload['lam']:.8g}"
              + (f"; {payload['note']}" if payload.get("note") else "") + ")")
        return EXIT_OK

    if cmd == "simulate":
        flat = _collect_flat(args, {"replicas": "replicas"})
        if args.times:
            flat["snapshot_times"] = _csv_list(args.times)
        payload = _post(client, "/simulate", _request_body(flat))
        path = _write(out_dir, "snapshots.csv", payload["csv"])
        _emit_manifest(out_dir, "simulate", payload)
        truncated = payload["truncated_replicas"]
        print(f"wrote {path} (truncated replicas: {truncated})")
        return EXIT_CAP_OR_DEGENERATE if truncated else EXIT_OK

    if cmd == "martingale":
        flat = _collect_flat(args, {"replicas": "replicas"})
        if args.lams:
            flat["lams"] = _csv_list(args.lams)
        if args.times:
            flat["snapshot_times"] = _csv_list(args.times)
        payload = _post(client, "/martingale", _request_body(flat))
        path = _write(out_dir, "martingale.csv", payload["csv"])
        _emit_manifest(out_dir, "martingale", payload)
        print(f"wrote {path}")
        return EXIT_OK

    if cmd == "spine":
        mapping = {"replicas": "replicas", "lam": "lam", "tau": "tau",
                   "t": "t", "beta": "beta", "kappa": "kappa", "level": "level"}
        flat = _collect_flat(args, mapping)
        if args.mode == "trace":
            payload = _post(client, "/spine", _request_body(flat))
            path = _write(out_dir, "spine_trace.csv", payload["csv"])
            _emit_manifest(out_dir, "spine", payload)
            print(f"wrote {path} (n_tau mean {payload['n_tau_mean']:.4g} "
                  f"+- {payload['n_tau_std_error']:.2g}, "
                  f"expected {payload['expected_n_tau']:.4g})")
            return EXIT_OK
        flat["event"] = "short_climb" if args.mode == "climb" else "type_exceeds"
        payload = _post(client, "/importance", _request_body(flat))
        _write(out_dir, "spine_estimate.json",
               json.dumps(payload, indent=2, sort_keys=True) + "\n")
        _emit_manifest(out_dir, "spine", payload)
        res = payload["result"]
        print(f"P(event) = {res['estimate']:.6g} +- {res['std_error']:.3g} "
              f"(hits {payload['hits']}, discarded {res['discarded']}, "
              f"log-weights [{payload['log_weight_min']:.3g}, "
              f"{payload['log_weight_median']:.3g}, {payload['log_weight_max']:.3g}])")
        return EXIT_CAP_OR_DEGENERATE if "is_degenerate" in res["flags"] else EXIT_OK

    if cmd == "birthdeath":
        mapping = {"replicas": "replicas", "schedule": "schedule", "birth": "birth",
                   "death": "death", "horizon": "horizon", "t": "t"}
        flat = _collect_flat(args, mapping)
        payload = _post(client, "/birthdeath", _request_body(flat))
        keep = {k: payload[k] for k in ("w", "u", "v", "mean", "pmf",
                                        "survival_exact", "survival_approx",
                                        "k_tau", "approx_applicable",
                                        "empirical_mean", "empirical_pmf")}
        _write(out_dir, "birthdeath.json",
               json.dumps(keep, indent=2, sort_keys=True) + "\n")
        _emit_manifest(out_dir, "birthdeath", payload)
        print(f"U={payload['u']:.6g} V={payload['v']:.6g} W={payload['w']:.6g} "
              f"mean={payload['mean']:.6g}")
        return EXIT_OK

    if cmd == "oracle":
        mapping = {"estimator": "estimator", "f": "f", "lam": "lam",
                   "t": "t", "replicas": "replicas"}
        flat = _collect_flat(args, mapping)
        payload = _post(client, "/oracle", _request_body(flat))
        _write(out_dir, "oracle_estimate.json",
               json.dumps(payload, indent=2, sort_keys=True) + "\n")
        _emit_manifest(out_dir, "oracle", payload)
        res = payload["result"]
        msg = f"estimate {res['estimate']:.6g} +- {res['std_error']:.3g}"
        if payload.get("closed_form") is not None:
            msg += f" (closed form {payload['closed_form']:.6g})"
        print(msg)
        return EXIT_OK

    if cmd == "verify":
        flat = _collect_flat(args, {"suite": "suite", "scale": "scale"})
        payload = _post(client, "/verify", _request_body(flat))
        _write(out_dir, "verify_report.csv", payload["report_csv"])
        for row in payload["rows"]:
            tag = {True: "PASS", False: "FAIL", None: "NOTE"}[row["passed"]]
            line = (f"[{tag}] c{row['criterion']:02d} {row['name']}: "
                    f"{row['measured']} vs {row['threshold']}")
            if row["note"]:
                line += f"  ({row['note']})"
            print(line)
        status = "PASS" if payload["passed"] else "FAIL"
        print(f"suite {payload['suite']}: {status} "
              f"({len(payload['rows'])} checks, {payload['wall_time_s']:.1f}s)")
        return EXIT_OK if payload["passed"] else EXIT_VERIFY_FAILED

    raise ValueError(f"unknown command {cmd!r}")


if __name__ == "__main__":
    sys.exit(main())
