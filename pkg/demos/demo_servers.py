#!/usr/bin/env python3
"""Spin up the key server, file server, and agent in one process and run
a realistic flow against them over HTTP.

Covers: account + ownership proof, RSA key publication and discovery,
IBE key escrow, an encrypted attachment, and the agent's package/
unpackage API with its origin policy.

Run: python3 demos/demo_servers.py
"""
import socket
import tempfile
import threading
import time
from pathlib import Path

import httpx
import uvicorn

from mgcore.agent import create_agent_app
from mgcore.attachments import attach_decrypt, attach_encrypt
from mgcore.clients import FileServerClient, KeyServerClient
from mgcore.fileserver import create_fileserver_app
from mgcore.keyserver import KeyServerStore, create_keyserver_app
from mgcore.keystore import Keystore
from mgcore.schemes.ibe import IbeScheme
from mgcore.schemes.rsa import RsaScheme


def serve(app):
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    server = uvicorn.Server(uvicorn.Config(app, log_level="error"))
    threading.Thread(target=server.run, kwargs={"sockets": [sock]}, daemon=True).start()
    while not server.started:
        time.sleep(0.01)
    return f"http://127.0.0.1:{port}"


workdir = Path(tempfile.mkdtemp(prefix="mg-demo-"))
print("working directory:", workdir)

key_server_url = serve(
    create_keyserver_app(KeyServerStore(workdir / "keyserver.db"), proof_channel="echo")
)
file_server_url = serve(create_fileserver_app(workdir / "blobs"))
print("key server:", key_server_url)
print("file server:", file_server_url)

# --- accounts and keys -------------------------------------------------
ks = KeyServerClient(key_server_url)
ks.create_account("alice", "alice account pw")
alice = ks.login("alice", "alice account pw")
alice.prove_ownership("alice@demo.test")  # echo channel returns the code

record = RsaScheme().generate_and_publish("alice@demo.test", alice)
print("published rsa key, fingerprint", record.fingerprint.hex())

ibe_record = IbeScheme().create_from_server("alice@demo.test", alice)
print("extracted ibe key, fingerprint", ibe_record.fingerprint.hex())

store = Keystore.init(workdir / "keystore", "master pw")
store.save_system(record)
store.save_system(ibe_record)

# --- encrypted attachment ------------------------------------------------
fs = FileServerClient(file_server_url)
manifest = attach_encrypt(b"attachment body " * 1000, "notes.txt", fs)
print("attachment capability:", manifest.capability)
assert attach_decrypt(manifest, fs) == b"attachment body " * 1000

# --- the agent ------------------------------------------------------------
agent_app = create_agent_app(
    workdir / "keystore",
    origin="http://127.0.0.1:0",  # demo only; normally host:port of the agent
    key_server_url=key_server_url,
)
agent_url = serve(agent_app)
with httpx.Client(base_url=agent_url) as agent:
    token = agent.post("/api/unlock", json={"master_password": "master pw"}).json()[
        "session_token"
    ]
    headers = {"Authorization": f"Bearer {token}"}
    print("key systems:", [s["label"] for s in
                           agent.get("/api/keysystems", headers=headers).json()["systems"]])
    armored = agent.post(
        "/api/package",
        headers=headers,
        json={"scheme": "ibe", "recipients": ["alice@demo.test"],
              "plaintext_html": "<b>hello through the agent</b>"},
    ).json()["armored"]
    body = agent.post("/api/unpackage", headers=headers, json={"armored": armored}).json()
    print("unpackaged:", body["plaintext_html"])

    refused = agent.post(
        "/api/package",
        headers={**headers, "Origin": "https://hostpage.example"},
        json={"scheme": "ibe", "recipients": ["alice@demo.test"], "plaintext_html": "x"},
    )
    print("host-page origin gets:", refused.status_code, refused.json()["code"])

print("\ndemo complete")
