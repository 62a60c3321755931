"""Test fixture: a live streaming server on an ephemeral port.

Prints `PORT <n>` once listening, then serves until stdin closes.
"""

import sys

sys.path.insert(0, "../src")

from motionstream.causal import CausalConfig, init_causal_params
from motionstream.generator import train_ngram
from motionstream.streaming.server import MotionServer, ServerConfig
from motionstream.vocab import EOM, MOTION_START, SOM


def main():
    seqs = []
    for _ in range(30):
        seqs.append([SOM] + [MOTION_START + (i % 9) for i in range(80)] + [EOM])
    model = train_ngram(seqs, order=3)
    causal = init_causal_params(CausalConfig(hidden=16, layers=1), seed=3, zero_out=False)
    server = MotionServer(ServerConfig(port=0, max_tokens=90), model, causal)
    host, port = server.start()
    print(f"PORT {port}", flush=True)
    sys.stdin.read()
    server.stop()


if __name__ == "__main__":
    main()
