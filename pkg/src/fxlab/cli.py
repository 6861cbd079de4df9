"""Thin command-line client for the fxlab service.

Commands build a request, send it to the service and print the response;
they carry no pipeline logic of their own. By default the FastAPI app is
mounted in-process (no socket), so the CLI works standalone; point it at a
running server with --server.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import sys

import httpx

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    from .service.app import app

    return httpx.Client(transport=httpx.ASGITransport(app=app), base_url="http://fxlab", timeout=None)


def _config_payload(args: argparse.Namespace) -> dict:
    fields = (
        "data", "out", "seed", "split_fraction", "cv_folds", "rejection_acceptance",
        "trade_cost", "ga_population", "ga_generations", "tsne_perplexity",
        "tsne_iterations", "tsne_subsample",
    )
    return {k: getattr(args, k) for k in fields if getattr(args, k, None) is not None}


def _fail(response: httpx.Response) -> int:
    try:
        body = response.json()
    except json.JSONDecodeError:
        print(f"error: HTTP {response.status_code}: {response.text}", file=sys.stderr)
        return EXIT_CONFIG
    if response.status_code == 422:  # request model validation
        print(f"error: invalid request: {body.get('detail')}", file=sys.stderr)
        return EXIT_CONFIG
    category = body.get("category", "config")
    print(f"error ({body.get('error', 'unknown')}): {body.get('message', response.text)}", file=sys.stderr)
    return EXIT_DATA if category == "data" else EXIT_CONFIG


def _post(args: argparse.Namespace, path: str, payload: dict) -> int:
    with _client(args.server) as client:
        response = client.post(path, json=payload)
        if response.status_code != 200:
            return _fail(response)
        _print_response(response.json())
        return EXIT_OK


def _print_response(body: dict) -> None:
    if "text" in body:
        print(body["text"], end="")
        return
    print(json.dumps(body, indent=2, sort_keys=True))


def _run_payload(args: argparse.Namespace) -> dict:
    return {"config_path": args.config, "config": _config_payload(args)}


def cmd_ingest_check(args) -> int:
    return _post(args, "/ingest-check", {"data": args.data})


def cmd_baseline(args) -> int:
    return _post(args, "/runs/baseline", _run_payload(args))


def cmd_optimize(args) -> int:
    return _post(args, "/runs/optimize", _run_payload(args))


def cmd_embed(args) -> int:
    payload = _run_payload(args)
    payload["chromosome_path"] = args.chromosome
    return _post(args, "/runs/embed", payload)


def cmd_report(args) -> int:
    return _post(args, "/report", {"out": args.out})


def cmd_print_config(args) -> int:
    with _client(args.server) as client:
        response = client.get("/config/defaults")
        if response.status_code != 200:
            return _fail(response)
        print(response.json()["config_text"], end="")
        return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _add_run_flags(p: argparse.ArgumentParser, data_required: bool = True) -> None:
    p.add_argument("--data", required=data_required, help="candle CSV (timestamp,open,high,low,close)")
    p.add_argument("--config", help="key=value run configuration file")
    p.add_argument("--seed", type=int, help="global seed for every stochastic stage")
    p.add_argument("--out", help="output directory for run artifacts")
    p.add_argument("--k", dest="cv_folds", type=int, help="cross-validation fold count")
    p.add_argument("--split-fraction", dest="split_fraction", type=float, help="train fraction (default 0.8)")
    p.add_argument("--acceptance", dest="rejection_acceptance", type=float, help="target acceptance rate")
    p.add_argument("--cost", dest="trade_cost", type=float, help="per-trade fractional cost")
    p.add_argument("--generations", dest="ga_generations", type=int, help="GA generations")
    p.add_argument("--population", dest="ga_population", type=int, help="GA population size")
    p.add_argument("--perplexity", dest="tsne_perplexity", type=float, help="t-SNE perplexity")
    p.add_argument("--tsne-iterations", dest="tsne_iterations", type=int, help="t-SNE iterations")
    p.add_argument("--subsample", dest="tsne_subsample", type=int, help="t-SNE subsample cap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fxlab", description=__doc__.splitlines()[0])
    parser.add_argument("--server", help="URL of a running fxlab service (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-check", help="validate a candle CSV and summarize it")
    p.add_argument("--data", required=True)
    p.set_defaults(fn=cmd_ingest_check)

    p = sub.add_parser("baseline", help="CV + backtest the literature-default feature set")
    _add_run_flags(p)
    p.set_defaults(fn=cmd_baseline)

    p = sub.add_parser("optimize", help="GA feature search, then one validation pass")
    _add_run_flags(p)
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("embed", help="t-SNE map of a chromosome's feature rows")
    _add_run_flags(p)
    p.add_argument("--chromosome", required=True, help="chromosome JSON from an optimize run")
    p.set_defaults(fn=cmd_embed)

    p = sub.add_parser("report", help="summarize a finished run directory")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("print-config", help="print the default configuration file")
    p.set_defaults(fn=cmd_print_config)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
