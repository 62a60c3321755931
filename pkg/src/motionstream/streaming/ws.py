"""Minimal WebSocket (RFC 6455) transport over blocking sockets: enough of
the protocol for text frames, ping/pong, and clean closes, plus a tiny
HTTP responder so the same port can serve the console's static assets.

Threading contract: one reader at a time per connection; sends are
serialized with an internal lock so any thread may send.
"""

import base64
import hashlib
import os
import secrets
import socket
import struct
import threading

WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

_MIME = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
}


class SocketClosed(ConnectionError):
    pass


class WebSocket:
    """One established WebSocket connection (either side)."""

    def __init__(self, sock: socket.socket, mask_outgoing: bool):
        self.sock = sock
        self.mask_outgoing = mask_outgoing
        self._send_lock = threading.Lock()
        self._buf = b""
        self.closed = False

    def _read_exact(self, n: int) -> bytes:
        while len(self._buf) < n:
            chunk = self.sock.recv(65536)
            if not chunk:
                raise SocketClosed("peer closed the connection")
            self._buf += chunk
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def recv_text(self) -> str:
        """Next complete text message (transparently answers pings)."""
        message = b""
        opcode_in_progress = None
        while True:
            b1, b2 = self._read_exact(2)
            fin = b1 & 0x80
            opcode = b1 & 0x0F
            masked = b2 & 0x80
            length = b2 & 0x7F
            if length == 126:
                (length,) = struct.unpack(">H", self._read_exact(2))
            elif length == 127:
                (length,) = struct.unpack(">Q", self._read_exact(8))
            mask = self._read_exact(4) if masked else None
            data = self._read_exact(length)
            if mask:
                data = bytes(c ^ mask[i % 4] for i, c in enumerate(data))
            if opcode == 0x9:  # ping
                self._send_frame(0xA, data)
                continue
            if opcode == 0xA:  # pong
                continue
            if opcode == 0x8:  # close
                try:
                    self._send_frame(0x8, data)
                except OSError:
                    pass
                self.closed = True
                raise SocketClosed("close frame received")
            if opcode in (0x1, 0x2):
                opcode_in_progress = opcode
                message = data
            elif opcode == 0x0:
                message += data
            else:
                raise ConnectionError(f"unsupported opcode {opcode}")
            if fin:
                if opcode_in_progress != 0x1:
                    raise ConnectionError("expected a text frame")
                return message.decode("utf-8")

    def send_text(self, text: str) -> None:
        self._send_frame(0x1, text.encode("utf-8"))

    def _send_frame(self, opcode: int, data: bytes) -> None:
        header = bytes([0x80 | opcode])
        n = len(data)
        mask_bit = 0x80 if self.mask_outgoing else 0x00
        if n < 126:
            header += bytes([mask_bit | n])
        elif n < 65536:
            header += bytes([mask_bit | 126]) + struct.pack(">H", n)
        else:
            header += bytes([mask_bit | 127]) + struct.pack(">Q", n)
        if self.mask_outgoing:
            mask = secrets.token_bytes(4)
            data = bytes(c ^ mask[i % 4] for i, c in enumerate(data))
            header += mask
        with self._send_lock:
            self.sock.sendall(header + data)

    def close(self) -> None:
        if not self.closed:
            self.closed = True
            try:
                self._send_frame(0x8, b"")
            except OSError:
                pass
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


def _read_http_head(sock: socket.socket):
    """Returns (header bytes, any extra bytes already read past the head)."""
    data = b""
    while b"\r\n\r\n" not in data:
        chunk = sock.recv(65536)
        if not chunk:
            raise SocketClosed("peer closed during HTTP headers")
        data += chunk
        if len(data) > 65536:
            raise ConnectionError("oversized HTTP header")
    head, extra = data.split(b"\r\n\r\n", 1)
    return head, extra


def _parse_headers(head: bytes):
    lines = head.split(b"\r\n")
    request = lines[0].decode("latin-1")
    headers = {}
    for line in lines[1:]:
        if b":" in line:
            k, v = line.split(b":", 1)
            headers[k.decode("latin-1").strip().lower()] = v.decode("latin-1").strip()
    return request, headers


def accept_connection(sock: socket.socket, static_dir=None):
    """Handle one inbound TCP connection.

    Returns a WebSocket on a successful upgrade; returns None when the
    request was plain HTTP (a console asset was served, or 404).
    """
    head, extra = _read_http_head(sock)
    request, headers = _parse_headers(head)
    parts = request.split()
    path = parts[1] if len(parts) >= 2 else "/"
    if headers.get("upgrade", "").lower() == "websocket" and "sec-websocket-key" in headers:
        accept = base64.b64encode(hashlib.sha1((headers["sec-websocket-key"] + WS_GUID).encode()).digest()).decode()
        resp = (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\nConnection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
        )
        sock.sendall(resp.encode("latin-1"))
        ws = WebSocket(sock, mask_outgoing=False)
        ws._buf = extra
        return ws
    _serve_static(sock, path, static_dir)
    return None


def _serve_static(sock: socket.socket, path: str, static_dir) -> None:
    body = b"not found"
    status = "404 Not Found"
    ctype = "text/plain"
    if static_dir:
        rel = path.split("?", 1)[0].lstrip("/") or "index.html"
        full = os.path.realpath(os.path.join(static_dir, rel))
        if full.startswith(os.path.realpath(static_dir)) and os.path.isfile(full):
            with open(full, "rb") as f:
                body = f.read()
            status = "200 OK"
            ctype = _MIME.get(os.path.splitext(full)[1], "application/octet-stream")
    resp = (
        f"HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\n"
        f"Content-Length: {len(body)}\r\nConnection: close\r\n\r\n"
    ).encode("latin-1") + body
    sock.sendall(resp)
    sock.close()


def connect(host: str, port: int, timeout: float = 5.0) -> WebSocket:
    """Client-side upgrade handshake."""
    sock = socket.create_connection((host, port), timeout=timeout)
    sock.settimeout(timeout)
    key = base64.b64encode(secrets.token_bytes(16)).decode()
    req = (
        f"GET /ws HTTP/1.1\r\nHost: {host}:{port}\r\n"
        "Upgrade: websocket\r\nConnection: Upgrade\r\n"
        f"Sec-WebSocket-Key: {key}\r\nSec-WebSocket-Version: 13\r\n\r\n"
    )
    sock.sendall(req.encode("latin-1"))
    head, extra = _read_http_head(sock)
    request, headers = _parse_headers(head)
    if " 101 " not in request:
        sock.close()
        raise ConnectionError(f"upgrade refused: {request}")
    expect = base64.b64encode(hashlib.sha1((key + WS_GUID).encode()).digest()).decode()
    if headers.get("sec-websocket-accept") != expect:
        sock.close()
        raise ConnectionError("bad Sec-WebSocket-Accept")
    sock.settimeout(None)
    ws = WebSocket(sock, mask_outgoing=True)
    ws._buf = extra  # bytes past the 101 head are already frame data
    return ws
