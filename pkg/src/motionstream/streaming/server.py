"""The streaming server: accepts WebSocket connections, tokenizes incoming
instructions, generates motion tokens, causally decodes them in chunks, and
streams MOTION_CHUNK messages while generation is still running.

Per session three roles run concurrently: the connection's receive loop
(instruction handling), a generation thread (tokenize -> generate ->
decode -> track, producing chunks into a bounded queue), and a sender
thread draining that queue to the socket.  The bounded queue is the only
shared structure; a full queue blocks the producer.
"""

import logging
import os
import queue
import socket
import threading
import time
import zlib

import numpy as np

from ..causal import CausalDecoderParams, StreamState, flush, push_tokens
from ..generator import GenerationSession, stream_tokens
from ..music import parse_music_text, tokenize_music
from ..synth import STAND_ROOT_HEIGHT
from ..tracking import PdConfig, PdTracker
from ..trajectory import parse_trajectory_text, tokenize_trajectory
from ..vocab import DELIMITERS, TextVocab, UNKNOWN_ID, UNKNOWN_WORD, to_global, tokenize_text
from . import ws
from .wire import ProtocolError, WireMessage, decode_message, encode_message, motion_chunk_payload

log = logging.getLogger("motionstream.server")
try:
    log.setLevel(os.environ.get("UA_LOG", "WARNING").upper())
except ValueError:
    log.setLevel(logging.WARNING)

STAND_ROOT = [0.0, 0.0, STAND_ROOT_HEIGHT, 1.0, 0.0, 0.0, 0.0]


def _now_ms() -> float:
    return time.perf_counter() * 1000.0


class ServerConfig:
    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 8765,
        chunk_tokens: int = 5,
        max_tokens: int = 250,
        temperature: float = 1.0,
        fps: float = 50.0,
        console_dir=None,
        history_len: int = 10,
    ):
        self.host = host
        self.port = port
        self.chunk_tokens = chunk_tokens
        self.max_tokens = max_tokens
        self.temperature = temperature
        self.fps = fps
        self.console_dir = console_dir
        self.history_len = history_len


class _Session:
    def __init__(self, session_id: str, server: "MotionServer"):
        cfg = server.config
        self.id = session_id
        self.gen_session = GenerationSession(seed=server.seed_for(session_id), history_len=cfg.history_len, max_len=cfg.max_tokens)
        self.stream = StreamState(server.causal, cfg.chunk_tokens)
        self.tracker = PdTracker(server.pd_config)
        self.frame_index = 0
        self.last_instruction_ms = None
        self.out_seq = 0
        self.seq_lock = threading.Lock()
        self.stop_flag = threading.Event()
        self.gen_thread = None
        self.sender_thread = None
        self.out_q = None


class MotionServer:
    def __init__(
        self,
        config: ServerConfig,
        generator_model,
        causal: CausalDecoderParams,
        text_vocab: TextVocab | None = None,
        music_codec=None,
        pd_config: PdConfig = PdConfig(),
        base_seed: int = 0,
    ):
        self.config = config
        self.model = generator_model
        self.causal = causal
        self.text_vocab = text_vocab or TextVocab({UNKNOWN_WORD: UNKNOWN_ID})
        self.music_codec = music_codec
        self.pd_config = pd_config
        self.base_seed = base_seed
        self._listener = None
        self._accept_thread = None
        self._stopping = threading.Event()
        self._conn_threads = []
        self.sessions = {}  # session id -> latest _Session (inspection/testing)

    def seed_for(self, session_id: str) -> int:
        return (self.base_seed + zlib.crc32(session_id.encode())) % (2**31)

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> tuple:
        """Bind and serve in background threads; returns (host, port)."""
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((self.config.host, self.config.port))
        self._listener.listen(16)
        self.config.port = self._listener.getsockname()[1]
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()
        log.info("listening on %s:%d", self.config.host, self.config.port)
        return self.config.host, self.config.port

    def serve_forever(self) -> None:
        if self._listener is None:
            self.start()
        try:
            while not self._stopping.is_set():
                time.sleep(0.2)
        except KeyboardInterrupt:
            pass
        self.stop()

    def stop(self) -> None:
        self._stopping.set()
        if self._listener:
            try:
                self._listener.close()
            except OSError:
                pass

    def _accept_loop(self):
        while not self._stopping.is_set():
            try:
                sock, _ = self._listener.accept()
            except OSError:
                return
            t = threading.Thread(target=self._handle_conn, args=(sock,), daemon=True)
            t.start()
            self._conn_threads.append(t)

    # -- per connection ----------------------------------------------------

    def _handle_conn(self, sock: socket.socket):
        try:
            conn = ws.accept_connection(sock, static_dir=self.config.console_dir)
        except (ConnectionError, OSError) as e:
            log.debug("handshake failed: %s", e)
            return
        if conn is None:
            return  # plain HTTP request, already answered
        sessions = {}
        try:
            while True:
                text = conn.recv_text()
                t_recv = _now_ms()
                try:
                    msg = decode_message(text)
                except ProtocolError as e:
                    self._send_raw(conn, None, "ERROR", {"reason": str(e)}, session="")
                    continue
                try:
                    self._dispatch(conn, sessions, msg, t_recv)
                except ProtocolError as e:
                    self._send(conn, sessions.get(msg.session), "ERROR", {"reason": str(e)})
        except (ws.SocketClosed, ConnectionError, OSError):
            pass
        finally:
            for sess in sessions.values():
                self._stop_generation(sess)
            conn.close()

    def _dispatch(self, conn, sessions, msg: WireMessage, t_recv: float):
        if msg.type == "LATENCY_PROBE":
            sess = sessions.get(msg.session)
            payload = {"t0_ms": float(msg.payload.get("t0_ms", 0.0)), "t1_ms": t_recv, "t2_ms": _now_ms()}
            self._send_raw(conn, sess, "LATENCY_PROBE", payload, session=msg.session)
        elif msg.type == "INSTRUCTION":
            sess = sessions.get(msg.session)
            if sess is None:
                sess = _Session(msg.session, self)
                sessions[msg.session] = sess
                self.sessions[msg.session] = sess
            self._stop_generation(sess)
            sess.last_instruction_ms = t_recv
            conditions = self._tokenize_instruction(msg.payload)
            self._send(conn, sess, "ACK", {"of_seq": msg.seq})
            self._start_generation(conn, sess, conditions, t_recv)
        elif msg.type == "CONTROL":
            action = msg.payload.get("action")
            sess = sessions.get(msg.session)
            if sess is None:
                raise ProtocolError(f"unknown session {msg.session!r}")
            if action == "stop":
                self._stop_generation(sess)
                self._send(conn, sess, "ACK", {"of_seq": msg.seq})
            elif action == "status":
                busy = sess.gen_thread is not None and sess.gen_thread.is_alive()
                self._send(conn, sess, "ACK", {"of_seq": msg.seq, "generating": bool(busy), "frames_sent": sess.frame_index})
            elif action == "start":
                self._send(conn, sess, "ACK", {"of_seq": msg.seq})
            else:
                raise ProtocolError(f"unknown control action {action!r}")
        elif msg.type in ("ACK", "ERROR", "MOTION_CHUNK"):
            log.debug("ignoring client %s", msg.type)
        else:
            raise ProtocolError(f"unsupported message type {msg.type}")

    # -- instruction pipeline ------------------------------------------------

    def _tokenize_instruction(self, payload: dict) -> list:
        """Condition token list (global ids) with per-modality delimiters."""
        tokens = []
        if "text" in payload:
            if not isinstance(payload["text"], str):
                raise ProtocolError("text payload must be a string")
            ids = tokenize_text(payload["text"], self.text_vocab)
            o, c = DELIMITERS["text"]
            tokens += [o] + [to_global("text", i) for i in ids] + [c]
        if "music" in payload:
            if self.music_codec is None:
                raise ProtocolError("this server has no music codec loaded")
            try:
                frames = parse_music_text(payload["music"])
            except ValueError as e:
                raise ProtocolError(f"bad music payload: {e}") from None
            ids = tokenize_music(frames, self.music_codec)
            o, c = DELIMITERS["music"]
            tokens += [o] + [to_global("music", int(i)) for i in ids] + [c]
        if "trajectory" in payload:
            try:
                pos, quat, fps = parse_trajectory_text(payload["trajectory"])
                ids = tokenize_trajectory(pos, quat, fps)
            except ValueError as e:
                raise ProtocolError(f"bad trajectory payload: {e}") from None
            log.info("trajectory tokens: %s", ids)
            o, c = DELIMITERS["trajectory"]
            tokens += [o] + [to_global("trajectory", int(i)) for i in ids] + [c]
        return tokens

    def _start_generation(self, conn, sess: _Session, conditions: list, t_recv: float):
        sess.stop_flag.clear()
        sess.out_q = queue.Queue(maxsize=8)
        sess.sender_thread = threading.Thread(target=self._sender_loop, args=(conn, sess), daemon=True)
        sess.gen_thread = threading.Thread(target=self._generate_loop, args=(sess, conditions, t_recv), daemon=True)
        sess.sender_thread.start()
        sess.gen_thread.start()

    def _stop_generation(self, sess: _Session):
        sess.stop_flag.set()
        if sess.gen_thread is not None:
            sess.gen_thread.join(timeout=10.0)
            sess.gen_thread = None
        if sess.sender_thread is not None:
            sess.sender_thread.join(timeout=10.0)
            sess.sender_thread = None

    def _generate_loop(self, sess: _Session, conditions: list, t_recv: float):
        cfg = self.config
        try:
            token_iter = stream_tokens(self.model, sess.gen_session, conditions, cfg.temperature)
            pending = []
            first = True
            t_first_token = None
            for local_id in token_iter:
                if t_first_token is None:
                    t_first_token = _now_ms()
                pending.append(local_id)
                if len(pending) == cfg.chunk_tokens:
                    self._emit_chunk(sess, pending, first, t_recv, t_first_token)
                    pending = []
                    first = False
                if sess.stop_flag.is_set():
                    break
            if pending and not sess.stop_flag.is_set():
                self._emit_chunk(sess, pending, first, t_recv, t_first_token or _now_ms(), final_partial=True)
        except Exception as e:  # propagate as an ERROR message, keep the session
            log.warning("generation failed: %s", e)
            sess.out_q.put(("error", str(e)))
        sess.out_q.put(("stop", None))

    def _emit_chunk(self, sess: _Session, tokens: list, first: bool, t_recv: float, t_first_token: float, final_partial: bool = False):
        t0 = _now_ms()
        frames = push_tokens(sess.stream, tokens)
        if final_partial:
            frames = np.concatenate([frames, flush(sess.stream)])
        t1 = _now_ms()
        tracked = sess.tracker.step_frames(frames)
        t2 = _now_ms()
        timing = None
        if first:
            gen_ms = max(t_first_token - t_recv, 0.0)
            timing = {
                "motion_generation_ms": gen_ms,
                "token_decode_ms": t1 - t0,
                "motion_track_ms": t2 - t1,
                "model_latency_ms": gen_ms + (t1 - t0) + (t2 - t1),
            }
        sess.out_q.put(("chunk", (sess.frame_index, frames, timing)))
        sess.frame_index += len(frames)

    def _sender_loop(self, conn, sess: _Session):
        while True:
            kind, item = sess.out_q.get()
            if kind == "stop":
                self._send(conn, sess, "CONTROL", {"action": "stop"})
                return
            if kind == "error":
                self._send(conn, sess, "ERROR", {"reason": item})
                continue
            frame_index, frames, timing = item
            if frames.shape[0] == 0:
                continue
            n = frames.shape[0]
            payload = motion_chunk_payload(
                self.config.fps,
                frame_index,
                [STAND_ROOT[0:3]] * n,
                [STAND_ROOT[3:7]] * n,
                frames,
            )
            if timing is not None:
                payload["timing"] = timing
            self._send(conn, sess, "MOTION_CHUNK", payload)

    # -- send helpers ------------------------------------------------------

    def _send(self, conn, sess: _Session | None, mtype: str, payload: dict):
        self._send_raw(conn, sess, mtype, payload, session=sess.id if sess else "")

    def _send_raw(self, conn, sess, mtype, payload, session=""):
        if sess is not None:
            with sess.seq_lock:
                sess.out_seq += 1
                msg = WireMessage(mtype, sess.out_seq, sess.id, _now_ms(), payload)
                try:
                    conn.send_text(encode_message(msg))
                except (OSError, ConnectionError):
                    pass
        else:
            msg = WireMessage(mtype, 0, session, _now_ms(), payload)
            try:
                conn.send_text(encode_message(msg))
            except (OSError, ConnectionError):
                pass
