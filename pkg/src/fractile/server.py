"""Loopback JSON service for the interactive explorer.

Single session; selection changes are serialized under a lock while read
endpoints serve the current immutable snapshot.  Responses carry the
session version so stale client updates can be dropped.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from fractile.recurrent import PairError
from fractile.workbench import Session


class SessionHandler(BaseHTTPRequestHandler):
    session: Session = None
    lock: threading.Lock = None

    # -- plumbing -----------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet
        pass

    def _send(self, code: int, payload, content_type="application/json"):
        body = (payload if isinstance(payload, (bytes, str))
                else json.dumps(payload))
        if isinstance(body, str):
            body = body.encode()
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _body(self):
        length = int(self.headers.get("Content-Length", 0))
        if not length:
            return {}
        try:
            return json.loads(self.rfile.read(length))
        except json.JSONDecodeError:
            return None

    def do_OPTIONS(self):  # CORS preflight for the explorer
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    # -- endpoints ------------------------------------------------------------

    def do_GET(self):
        if self.path == "/session":
            with self.lock:
                self._send(200, self.session.scene())
        elif self.path == "/export.svg":
            try:
                svg = self._export_svg()
                self._send(200, svg, "image/svg+xml")
            except PairError as exc:
                self._send(409, {"error": str(exc)})
        else:
            self._send(404, {"error": f"unknown path {self.path}"})

    def do_POST(self):
        body = self._body()
        if body is None:
            self._send(400, {"error": "invalid JSON body"})
            return
        if self.path == "/selection":
            edges = body.get("edges")
            if not isinstance(edges, list) or \
                    not all(isinstance(e, str) for e in edges):
                self._send(400, {"error": "body must be {\"edges\": [ids]}"})
                return
            known = set()
            for p in range(self.session.rule.m):
                known.update(c.id() for c in self.session.contracted.copies[p])
            bad = [e for e in edges if e not in known]
            if bad:
                self._send(400, {"error": "unknown edge ids", "ids": bad[:8]})
                return
            with self.lock:
                report = self.session.set_selection(edges)
            self._send(200, report)
        elif self.path == "/iterate":
            level = body.get("level", 0)
            if not isinstance(level, int) or not (0 <= level <= 10):
                self._send(400, {"error": "level must be an integer in 0..10"})
                return
            try:
                with self.lock:
                    polylines = self.session.iterate_polylines(level)
                    version = self.session.version
                lam = float(self.session.rule.lam) ** self.session.n
                diam = _max_diameter(self.session.rule)
                self._send(200, {
                    "version": version,
                    "level": level,
                    "cauchyBound": diam * lam ** (-level),
                    "polylines": polylines,
                })
            except PairError as exc:
                self._send(409, {"error": str(exc)})
        elif self.path == "/analyze":
            try:
                with self.lock:
                    result = self.session.analysis()
                    version = self.session.version
                self._send(200, {
                    "version": version,
                    "dimension": result.dimension,
                    "dimensionText": result.dimension_text,
                    "injectivityDepth": result.injectivity_n,
                    "cohomology": list(result.groups),
                    "cohomologyLines": result.cohomology_lines(),
                    "diagnostics": result.index_diagnostics,
                })
            except PairError as exc:
                self._send(409, {"error": str(exc)})
        else:
            self._send(404, {"error": f"unknown path {self.path}"})

    def _export_svg(self) -> str:
        from fractile.fractal import build_edge_substitution, iterate
        from fractile.svg import render_rule_overlay

        with self.lock:
            pair = self.session.pair()
            es = build_edge_substitution(pair)
            polylines = iterate(es, 4).polylines
            return render_rule_overlay(self.session.rule,
                                       graph=self.session.graph,
                                       level_polylines=polylines, es=es)


def _max_diameter(rule) -> float:
    worst = 0.0
    for p in range(rule.m):
        vs = rule.support(p).vertices
        for a in vs:
            for b in vs:
                d = ((float(a.x) - float(b.x)) ** 2
                     + (float(a.y) - float(b.y)) ** 2) ** 0.5
                worst = max(worst, d)
    return worst


def make_server(session: Session, port: int = 8642,
                host: str = "127.0.0.1") -> ThreadingHTTPServer:
    handler = type("BoundHandler", (SessionHandler,), {
        "session": session,
        "lock": threading.Lock(),
    })
    return ThreadingHTTPServer((host, port), handler)


def serve(session: Session, port: int = 8642) -> None:
    httpd = make_server(session, port)
    print(f"session service on http://127.0.0.1:{port} "
          f"(rule: {session.rule.name})")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
