"""The playback client: connects to the streaming server, sends
instructions, accumulates MOTION_CHUNKs in the motion cache, and pops
frames on a drift-free 20 ms playback clock.  Also measures the latency
breakdown via LATENCY_PROBE clock exchange."""

import threading
import time

from .cache import MotionCache, PLAYBACK_TICK_MS, PopResult
from .wire import ProtocolError, TimingBreakdown, WireMessage, decode_message, encode_message
from . import ws


class MeasurementError(RuntimeError):
    pass


def _now_ms() -> float:
    return time.perf_counter() * 1000.0


class StreamClient:
    def __init__(self, host: str, port: int, session: str = "s0", cache_capacity: int = 4096):
        self.host = host
        self.port = port
        self.session = session
        self.cache = MotionCache(cache_capacity)
        self.frames = []  # every received frame, in order
        self.chunk_seqs = []  # seq of every MOTION_CHUNK, for ordering checks
        self.server_timing = None  # timing block from the first chunk of the last instruction
        self.first_chunk_recv_ms = None
        self.first_chunk_sent_ms = None  # server clock
        self.clock_offset_ms = None  # server_clock - client_clock
        self.errors = []
        self._conn = None
        self._recv_thread = None
        self._seq = 0
        self._done = threading.Event()
        self._probe_reply = None
        self._probe_event = threading.Event()
        self._acks = []
        self._lock = threading.Lock()

    # -- connection --------------------------------------------------------

    def connect(self, timeout: float = 5.0):
        self._conn = ws.connect(self.host, self.port, timeout=timeout)
        self._recv_thread = threading.Thread(target=self._recv_loop, daemon=True)
        self._recv_thread.start()
        return self

    def close(self):
        if self._conn:
            self._conn.close()
        self.cache.close()

    def _send(self, mtype: str, payload: dict):
        self._seq += 1
        msg = WireMessage(mtype, self._seq, self.session, _now_ms(), payload)
        self._conn.send_text(encode_message(msg))
        return self._seq

    def _recv_loop(self):
        try:
            while True:
                text = self._conn.recv_text()
                now = _now_ms()
                try:
                    msg = decode_message(text)
                except ProtocolError as e:
                    self.errors.append(str(e))
                    continue
                if msg.type == "MOTION_CHUNK":
                    payload = msg.payload
                    self.chunk_seqs.append(msg.seq)
                    with self._lock:
                        if self.first_chunk_recv_ms is None:
                            self.first_chunk_recv_ms = now
                            self.first_chunk_sent_ms = msg.timestamp_ms
                        if "timing" in payload:
                            self.server_timing = payload["timing"]
                        self.frames.extend(payload["frames"])
                    self.cache.push(payload["first_frame_index"], payload["frames"])
                elif msg.type == "LATENCY_PROBE":
                    self._probe_reply = (msg.payload, now)
                    self._probe_event.set()
                elif msg.type == "CONTROL" and msg.payload.get("action") == "stop":
                    self._done.set()
                elif msg.type == "ACK":
                    self._acks.append(msg)
                elif msg.type == "ERROR":
                    self.errors.append(msg.payload.get("reason", "unknown error"))
                    self._done.set()
        except (ws.SocketClosed, ConnectionError, OSError):
            self._done.set()

    # -- operations ----------------------------------------------------------

    def probe_clock(self, timeout: float = 5.0) -> float:
        """Half-RTT clock offset estimate (server clock minus client clock)."""
        self._probe_event.clear()
        t0 = _now_ms()
        self._send("LATENCY_PROBE", {"t0_ms": t0})
        if not self._probe_event.wait(timeout):
            raise MeasurementError("latency probe timed out")
        payload, t3 = self._probe_reply
        t1, t2 = float(payload["t1_ms"]), float(payload["t2_ms"])
        self.clock_offset_ms = ((t1 - t0) + (t2 - t3)) / 2.0
        return self.clock_offset_ms

    def instruction(self, text=None, trajectory=None, music=None, wait: bool = True, timeout: float = 60.0) -> float:
        """Send one INSTRUCTION; returns the send timestamp (client clock, ms)."""
        payload = {}
        if text is not None:
            payload["text"] = text
        if trajectory is not None:
            payload["trajectory"] = trajectory
        if music is not None:
            payload["music"] = music
        with self._lock:
            self.first_chunk_recv_ms = None
            self.first_chunk_sent_ms = None
            self.server_timing = None
        self._done.clear()
        t_send = _now_ms()
        self._send("INSTRUCTION", payload)
        if wait and not self._done.wait(timeout):
            raise MeasurementError("generation did not finish in time")
        return t_send

    def stop(self) -> int:
        return self._send("CONTROL", {"action": "stop"})

    def wait_first_frame(self, timeout: float = 10.0) -> float:
        deadline = time.perf_counter() + timeout
        while time.perf_counter() < deadline:
            with self._lock:
                if self.first_chunk_recv_ms is not None:
                    return self.first_chunk_recv_ms
            if self._done.is_set() and self.errors:
                raise MeasurementError(f"server error: {self.errors[-1]}")
            time.sleep(0.001)
        raise MeasurementError("no frame arrived in time")

    def play(self, duration_s: float, tick_ms: float = PLAYBACK_TICK_MS, on_frame=None):
        """Pop the cache on a drift-free tick for `duration_s`; returns
        (pop timestamps ms, PopResults)."""
        times = []
        results = []
        tick = tick_ms / 1000.0
        t0 = time.perf_counter()
        k = 0
        end = t0 + duration_s
        while True:
            target = t0 + k * tick
            if target > end:
                break
            _sleep_until(target)
            now = time.perf_counter()
            res = self.cache.pop(now * 1000.0)
            times.append(now * 1000.0)
            results.append(res)
            if on_frame:
                on_frame(res)
            k += 1
        return times, results


def _sleep_until(target: float):
    """Hybrid sleep: coarse sleep then a short spin for tick precision."""
    while True:
        now = time.perf_counter()
        remain = target - now
        if remain <= 0:
            return
        if remain > 0.0015:
            time.sleep(remain - 0.0015)
        else:
            pass  # spin


def measure_latency(client: StreamClient, text=None, trajectory=None, music=None, probe_timeout: float = 5.0) -> TimingBreakdown:
    """Full breakdown for one instruction: server-side component stamps plus
    transmission (clock-offset corrected) and total instruction-to-playable
    delay measured client-side."""
    offset = client.probe_clock(timeout=probe_timeout)
    t_send = client.instruction(text=text, trajectory=trajectory, music=music, wait=False)
    t_first = client.wait_first_frame()
    client._done.wait(60.0)
    timing = client.server_timing or {}
    sent_server = client.first_chunk_sent_ms
    transmission = max((t_first - (sent_server - offset)), 0.0) if sent_server is not None else 0.0
    return TimingBreakdown(
        motion_generation_ms=float(timing.get("motion_generation_ms", 0.0)),
        token_decode_ms=float(timing.get("token_decode_ms", 0.0)),
        motion_track_ms=float(timing.get("motion_track_ms", 0.0)),
        data_transmission_ms=float(transmission),
        model_latency_ms=float(timing.get("model_latency_ms", 0.0)),
        total_delay_ms=max(t_first - t_send, 0.0),
    )
