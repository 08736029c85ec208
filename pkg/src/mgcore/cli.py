"""Command-line driver.

Subcommands: keygen, list, encrypt, decrypt, scan, serve-keyserver,
serve-fileserver, serve-agent, bench-fixture, bench-report.

Secrets never travel on the command line: the master password and other
passwords are read from environment variables named by ``--*-env`` flags.
Armor goes to stdout; plaintext goes to stdout as raw bytes; diagnostics
go to stderr and never contain plaintext.  Exit codes: 0 success, 1
operational failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import base64
import json
import os
import sys
from pathlib import Path
from typing import Optional

from .attachments import AttachmentManifest, attach_decrypt, attach_encrypt
from .bench import BenchFixtureSpec, aggregate, generate_fixture_pages, load_results
from .clients import FileServerClient, KeyServerClient, KeyServerError
from .errors import MgError
from .keystore import Keystore
from .package_format import scan_text
from .schemes.ibe import IbeScheme
from .schemes.password import PasswordScheme
from .schemes.rsa import RsaScheme
from .service import decrypt_armored, encrypt_to_armor

ENVELOPE_KEY = "mg_envelope"


def _env_secret(var: Optional[str], what: str) -> str:
    if not var:
        raise MgError(f"{what}: pass --{what.replace(' ', '-')}-env or set the flag")
    value = os.environ.get(var)
    if value is None:
        raise MgError(f"environment variable {var} is not set")
    return value


def _open_keystore(args) -> Keystore:
    password = _env_secret(args.master_pass_env, "master pass")
    path = Path(args.keystore)
    if path.exists():
        return Keystore.unlock(path, password)
    return Keystore.init(path, password)


def _key_server(args) -> Optional[KeyServerClient]:
    return KeyServerClient(args.key_server) if getattr(args, "key_server", None) else None


def _account_session(args, client: KeyServerClient):
    """Log in, creating the account on first use."""
    password = _env_secret(args.account_pass_env, "account pass")
    if not args.username:
        raise MgError("--username is required for key-server operations")
    try:
        return client.login(args.username, password)
    except KeyServerError as exc:
        if exc.status != 401:
            raise
    client.create_account(args.username, password)
    return client.login(args.username, password)


def _prove_ownership(session, identity: str, args) -> None:
    if args.proof_code:
        proof_id, _ = session.start_proof(identity)
        session.complete_proof(identity, proof_id, args.proof_code)
    else:
        # echo-channel servers return the code directly; otherwise the
        # operator must rerun with --proof-code
        session.prove_ownership(identity)


# -- subcommands ------------------------------------------------------------


def cmd_keygen(args) -> int:
    store = _open_keystore(args)
    if args.scheme == "password":
        shared = _env_secret(args.shared_pass_env, "shared pass")
        if not args.label:
            raise MgError("--label is required for password keys")
        record = PasswordScheme().create(
            {"label": args.label, "password": shared,
             "stored": "false" if args.ephemeral else "true"}
        )
    elif args.scheme in ("rsa", "ibe"):
        if not args.identity:
            raise MgError("--identity is required for rsa/ibe keys")
        client = _key_server(args)
        if client is None:
            raise MgError("--key-server is required for rsa/ibe keys")
        session = _account_session(args, client)
        _prove_ownership(session, args.identity, args)
        if args.scheme == "rsa":
            record = RsaScheme().generate_and_publish(args.identity, session)
        else:
            record = IbeScheme().create_from_server(args.identity, session)
    else:  # pragma: no cover - argparse restricts choices
        raise MgError(f"unknown scheme {args.scheme!r}")
    store.save_system(record)
    print(f"created {args.scheme} key system {record.fingerprint.hex()}"
          + (f" for {record.identity}" if record.identity else f" ({record.label})"))
    return 0


def cmd_list(args) -> int:
    store = _open_keystore(args)
    for record in store.list():
        print(
            f"{record.scheme_id}\t{record.fingerprint.hex()}\t"
            f"{record.identity or '-'}\t{record.label}"
        )
    return 0


def _build_envelope(body: bytes, manifests: list[AttachmentManifest]) -> bytes:
    doc = {
        ENVELOPE_KEY: 1,
        "body_b64": base64.b64encode(body).decode(),
        "attachments": [m.to_dict() for m in manifests],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


def cmd_encrypt(args) -> int:
    plaintext = sys.stdin.buffer.read()
    recipients = [r for r in (args.recipients or "").split(",") if r]
    store = Keystore.unlock(Path(args.keystore), _env_secret(args.master_pass_env, "master pass")) \
        if args.keystore else None

    if args.attach:
        if not args.file_server:
            raise MgError("--attach requires --file-server")
        file_client = FileServerClient(args.file_server)
        manifests = []
        for name in args.attach:
            data = Path(name).read_bytes()
            manifests.append(attach_encrypt(data, Path(name).name, file_client))
        plaintext = _build_envelope(plaintext, manifests)

    armored = encrypt_to_armor(
        store,
        recipients,
        plaintext,
        scheme_name=args.scheme,
        label=args.label,
        identity=args.identity,
        key_server=_key_server(args),
        password=os.environ.get(args.shared_pass_env) if args.shared_pass_env else None,
    )
    print(armored)
    return 0


def cmd_decrypt(args) -> int:
    armored = sys.stdin.read().strip()
    store = _open_keystore(args)
    password = os.environ.get(args.shared_pass_env) if args.shared_pass_env else None
    plaintext, _record = decrypt_armored(store, armored, password=password)

    if args.attach_dir:
        try:
            doc = json.loads(plaintext.decode("utf-8"))
            is_envelope = isinstance(doc, dict) and doc.get(ENVELOPE_KEY) == 1
        except (ValueError, UnicodeDecodeError):
            is_envelope = False
        if is_envelope:
            if not args.file_server:
                raise MgError("--attach-dir requires --file-server")
            file_client = FileServerClient(args.file_server)
            out_dir = Path(args.attach_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            for item in doc["attachments"]:
                manifest = AttachmentManifest.from_dict(item)
                data = attach_decrypt(manifest, file_client)
                target = out_dir / Path(manifest.filename).name
                target.write_bytes(data)
                print(f"wrote attachment {target}", file=sys.stderr)
            plaintext = base64.b64decode(doc["body_b64"])

    sys.stdout.buffer.write(plaintext)
    sys.stdout.buffer.flush()
    return 0


def cmd_scan(args) -> int:
    text = Path(args.file).read_text(encoding="utf-8")
    for span in scan_text(text):
        print(f"{span.start}\t{span.end}")
    return 0


def cmd_serve_keyserver(args) -> int:
    import uvicorn

    from .keyserver import KeyServerStore, create_keyserver_app

    passphrase = _env_secret(args.server_pass_env, "server pass")
    app = create_keyserver_app(
        KeyServerStore(args.db),
        proof_channel=args.proof_channel,
        ibe_group=args.ibe_group,
        server_passphrase=passphrase,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_serve_fileserver(args) -> int:
    import uvicorn

    from .fileserver import create_fileserver_app

    app = create_fileserver_app(
        args.storage,
        max_bytes=args.max_bytes,
        rate_limit_per_minute=args.rate_limit or None,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_serve_agent(args) -> int:
    import uvicorn

    from .agent import create_agent_app

    origin = f"http://{args.host}:{args.port}"
    app = create_agent_app(
        args.keystore,
        assets_dir=args.assets,
        origin=origin,
        key_server_url=args.key_server,
        bench_results_path=args.bench_out,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_bench_fixture(args) -> int:
    spec = BenchFixtureSpec(
        n=args.n,
        seed=args.seed,
        dynamic_delay_ms=args.delay_ms,
        agent_origin=args.agent_origin,
    )
    keystore = _open_keystore(args) if args.keystore else None
    info = generate_fixture_pages(spec, args.out, keystore=keystore)
    print(json.dumps(info, indent=2))
    return 0


def cmd_bench_report(args) -> int:
    report = aggregate(load_results(args.results), min_runs=args.runs)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print("browser\tstage\tn\truns\tmean ms/elem\tp95 ms/elem\tmean total ms")
        for cell in report.cells:
            print(
                f"{cell.browser_label}\t{cell.stage}\t{cell.n}\t{cell.runs}\t"
                f"{cell.mean_ms_per_element:.3f}\t{cell.p95_ms_per_element:.3f}\t"
                f"{cell.mean_total_ms:.1f}"
            )
        for regression in report.regressions:
            print(f"REGRESSION: {regression}")
    return 1 if report.regressions else 0


# -- parser -----------------------------------------------------------------


def _add_keystore_flags(parser, required=True):
    parser.add_argument("--keystore", required=required, help="keystore file path")
    parser.add_argument("--master-pass-env", required=required,
                        help="env var holding the master password")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mgcore", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="create a key system and save it to the keystore")
    _add_keystore_flags(p)
    p.add_argument("--scheme", required=True, choices=["password", "rsa", "ibe"])
    p.add_argument("--label", help="name for password keys")
    p.add_argument("--identity", help="identity (email) for rsa/ibe keys")
    p.add_argument("--shared-pass-env", help="env var with the shared password")
    p.add_argument("--ephemeral", action="store_true",
                   help="do not store derived password key material")
    p.add_argument("--key-server", help="key server base URL")
    p.add_argument("--username", help="key server account name")
    p.add_argument("--account-pass-env", help="env var with the account password")
    p.add_argument("--proof-code", help="ownership proof code received out of band")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("list", help="list key systems in the keystore")
    _add_keystore_flags(p)
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("encrypt", help="encrypt stdin to armored stdout")
    _add_keystore_flags(p, required=False)
    p.add_argument("--scheme", choices=["password", "rsa", "ibe"])
    p.add_argument("--label")
    p.add_argument("--identity")
    p.add_argument("--recipients", help="comma-separated recipient identities")
    p.add_argument("--shared-pass-env")
    p.add_argument("--key-server")
    p.add_argument("--file-server")
    p.add_argument("--attach", action="append", metavar="FILE",
                   help="encrypt FILE to the file server and embed its manifest")
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt armored stdin to raw stdout")
    _add_keystore_flags(p)
    p.add_argument("--shared-pass-env")
    p.add_argument("--file-server")
    p.add_argument("--attach-dir", help="extract embedded attachments here")
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("scan", help="report armored payload offsets in a text file")
    p.add_argument("file")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("serve-keyserver", help="run the key server")
    p.add_argument("--db", required=True, help="sqlite database path")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8750)
    p.add_argument("--proof-channel", default="console",
                   choices=["console", "echo", "capture"])
    p.add_argument("--ibe-group", default="ss512", choices=["ss512", "mock"])
    p.add_argument("--server-pass-env", required=True,
                   help="env var with the master-secret sealing passphrase")
    p.set_defaults(func=cmd_serve_keyserver)

    p = sub.add_parser("serve-fileserver", help="run the file server")
    p.add_argument("--storage", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8751)
    p.add_argument("--max-bytes", type=int, default=25 * 1024 * 1024)
    p.add_argument("--rate-limit", type=int, default=600,
                   help="uploads per minute per address; 0 disables")
    p.set_defaults(func=cmd_serve_fileserver)

    p = sub.add_parser("serve-agent", help="run the localhost overlay agent")
    p.add_argument("--keystore", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8747)
    p.add_argument("--assets", help="frontend build output directory")
    p.add_argument("--key-server")
    p.add_argument("--bench-out", help="bench results JSONL path")
    p.set_defaults(func=cmd_serve_agent)

    p = sub.add_parser("bench-fixture", help="generate benchmark fixture pages")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delay-ms", type=int, default=250)
    p.add_argument("--agent-origin", default="http://127.0.0.1:8747")
    p.add_argument("--out", required=True)
    p.add_argument("--keystore", help="also save the fixture key here")
    p.add_argument("--master-pass-env")
    p.set_defaults(func=cmd_bench_fixture)

    p = sub.add_parser("bench-report", help="aggregate bench results")
    p.add_argument("results")
    p.add_argument("--runs", type=int, default=10, help="minimum runs per cell")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench_report)

    return parser


def run_command(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
