"""Single command-line entrypoint wiring every subsystem: training,
tokenization, generation, augmentation, corruption, sweeps, the streaming
server/client pair, evaluation, and the self-test gate.

Exit codes: 0 success, 1 user error, 2 internal error.
"""

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

USER_ERROR = 1
INTERNAL_ERROR = 2

logging.basicConfig(level=os.environ.get("UA_LOG", "WARNING").upper())
log = logging.getLogger("motionstream")


class UserError(ValueError):
    pass


def _load_motion_dir(path, canonical=True):
    from .motion import load_motion

    files = sorted(Path(path).glob("*.motion"))
    if not files:
        raise UserError(f"no .motion files in {path}")
    return [load_motion(f, canonical=canonical) for f in files], files


def _parse_bind(addr: str):
    host, _, port = addr.rpartition(":")
    return host or "127.0.0.1", int(port)


# -- subcommand implementations ---------------------------------------------


def cmd_train_codec(args) -> int:
    from .codec import CodecConfig, default_music_config, save_codec
    from .codec.train import TrainSettings, eval_rms, train_codec
    from .music import load_music_features
    from .synth import sinusoid_corpus

    if args.music:
        files = sorted(Path(args.corpus).glob("*.music")) if args.corpus else []
        if not files:
            raise UserError("music training needs --corpus with .music feature files")
        corpus = [load_music_features(f) for f in files]
        cfg = default_music_config(hidden_channels=args.hidden, downsample=args.downsample)
    elif args.synth:
        corpus = [s.dof for s in sinusoid_corpus(args.synth, length=args.synth_length, seed=args.seed)]
        cfg = CodecConfig(hidden_channels=args.hidden, downsample=args.downsample)
    else:
        if not args.corpus:
            raise UserError("give --corpus <dir> or --synth N")
        seqs, _ = _load_motion_dir(args.corpus)
        corpus = [s.dof for s in seqs]
        cfg = CodecConfig(hidden_channels=args.hidden, downsample=args.downsample)

    settings = TrainSettings(
        steps=args.steps, batch=args.batch, window=args.window, lr=args.lr,
        optimizer=args.optimizer, dtype=args.dtype, eval_every=args.eval_every,
        target_rms=args.target_rms, log_every=args.log_every,
    )
    result = train_codec(corpus, cfg, settings, seed=args.seed)
    rms = eval_rms(result.params, corpus[: min(64, len(corpus))])
    print(f"steps={result.stopped_at} final_loss={result.losses[-1]:.6f} rms_max={rms.max():.4f} rms_mean={rms.mean():.4f}")
    save_codec(result.params, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_train_causal(args) -> int:
    from .causal import CausalConfig, CausalTrainSettings, save_causal, train_causal
    from .codec import load_codec
    from .synth import sinusoid_corpus

    codec = load_codec(args.codec, dtype=np.float64)
    if args.synth:
        corpus = [s.dof for s in sinusoid_corpus(args.synth, length=args.synth_length, seed=args.seed)]
    else:
        if not args.corpus:
            raise UserError("give --corpus <dir> or --synth N")
        seqs, _ = _load_motion_dir(args.corpus)
        corpus = [s.dof for s in seqs]
    cfg = CausalConfig(
        levels=codec.config.levels, hidden=args.hidden, layers=args.layers,
        kernel_size=args.kernel, upsample=codec.config.downsample, output_dim=codec.config.input_dim,
    )
    params, losses = train_causal(codec, corpus, cfg, CausalTrainSettings(steps=args.steps, batch=args.batch, lr=args.lr, log_every=args.log_every), seed=args.seed)
    print(f"steps={len(losses)} final_loss={losses[-1]:.6f}")
    save_causal(params, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_train_gen(args) -> int:
    from .generator import load_token_corpus, save_ngram, train_ngram

    corpus = load_token_corpus(args.tokens)
    model = train_ngram(corpus, order=args.order, discount=args.discount)
    save_ngram(model, args.out)
    print(f"trained order-{args.order} model on {len(corpus)} sequences; wrote {args.out}")
    return 0


def cmd_tokenize(args) -> int:
    from .codec import encode, load_codec
    from .motion import load_motion
    from .music import load_music_features, tokenize_music
    from .trajectory import load_trajectory, tokenize_trajectory
    from .vocab import EOM, SOM, load_text_vocab, to_global, tokenize_text

    if args.motion_dir:
        if not args.codec or not args.corpus_out:
            raise UserError("--motion-dir needs --codec and --corpus-out")
        codec = load_codec(args.codec)
        seqs, files = _load_motion_dir(args.motion_dir)
        lines = []
        for seq in seqs:
            x = seq.dof[: len(seq) - len(seq) % codec.config.downsample]
            ids = [SOM] + [to_global("motion", int(t)) for t in encode(x, codec)] + [EOM]
            lines.append(" ".join(str(t) for t in ids))
        with open(args.corpus_out, "w", newline="\n") as f:
            f.write("\n".join(lines) + "\n")
        print(f"wrote {len(lines)} sequences to {args.corpus_out}")
        return 0
    if args.traj:
        pos, quat, fps = load_trajectory(args.traj)
        tokens = tokenize_trajectory(pos, quat, fps)
    elif args.music:
        if not args.codec:
            raise UserError("--music needs --codec <music codec file>")
        tokens = list(tokenize_music(load_music_features(args.music), load_codec(args.codec)))
    elif args.motion:
        if not args.codec:
            raise UserError("--motion needs --codec <motion codec file>")
        codec = load_codec(args.codec)
        seq = load_motion(args.motion, canonical=True)
        x = seq.dof[: len(seq) - len(seq) % codec.config.downsample]
        tokens = list(encode(x, codec))
    elif args.text is not None:
        if not args.vocab:
            raise UserError("--text needs --vocab <file>")
        tokens = tokenize_text(args.text, load_text_vocab(args.vocab))
    else:
        raise UserError("give one of --traj/--music/--motion/--text")
    print(" ".join(str(int(t)) for t in tokens))
    return 0


def cmd_generate(args) -> int:
    from .causal import decode_stream, load_causal
    from .generator import GenerationSession, generate, load_ngram
    from .motion import MotionSequence, save_motion
    from .synth import STAND_ROOT_HEIGHT
    from .trajectory import load_trajectory, tokenize_trajectory
    from .vocab import DELIMITERS, load_text_vocab, to_global, tokenize_text

    model = load_ngram(args.model)
    conditions = []
    if args.text is not None:
        if not args.vocab:
            raise UserError("--text needs --vocab")
        ids = tokenize_text(args.text, load_text_vocab(args.vocab))
        o, c = DELIMITERS["text"]
        conditions += [o] + [to_global("text", i) for i in ids] + [c]
    if args.traj:
        pos, quat, fps = load_trajectory(args.traj)
        ids = tokenize_trajectory(pos, quat, fps)
        o, c = DELIMITERS["trajectory"]
        conditions += [o] + [to_global("trajectory", int(i)) for i in ids] + [c]
    session = GenerationSession(seed=args.seed, max_len=args.max_len)
    tokens = generate(model, session, conditions, temperature=args.temperature)
    print(" ".join(str(t) for t in tokens))
    if args.out:
        if not args.causal:
            raise UserError("--out needs --causal <decoder file> to decode tokens")
        params = load_causal(args.causal)
        frames = decode_stream(tokens, params, chunk_size=args.chunk_tokens)
        n = frames.shape[0]
        pos = np.zeros((max(n, 1), 3))
        pos[:, 2] = STAND_ROOT_HEIGHT
        quat = np.tile([1.0, 0.0, 0.0, 0.0], (max(n, 1), 1))
        seq = MotionSequence(50.0, frames if n else np.zeros((1, 29)), pos, quat)
        save_motion(seq, args.out)
        print(f"wrote {args.out} ({n} frames)")
    return 0


def cmd_augment(args) -> int:
    from .augment import HistoryBuffer, QcLimits, build_library, save_qc_report, synthesize
    from .motion import save_motion

    seqs, _ = _load_motion_dir(args.library)
    clips = build_library(seqs)
    if not clips:
        raise UserError("library produced no usable clips")
    rng = np.random.Generator(np.random.PCG64(args.seed))
    out, report = synthesize(
        clips,
        duration=args.minutes * 60.0,
        rng=rng,
        history=HistoryBuffer(capacity=args.history_capacity),
        limits=QcLimits(max_dof_delta=args.max_dof_delta, max_root_jump=args.max_root_jump),
    )
    save_motion(out, args.out)
    print(f"synthesized {out.duration:.1f}s from {len(clips)} clips; {len(report.transitions)} transitions, {report.filtered} filtered")
    if args.qc_report:
        save_qc_report(report, args.qc_report)
        print(f"wrote {args.qc_report}")
    return 0


def cmd_corrupt(args) -> int:
    from .motion import load_motion, save_motion
    from .robustness import NoiseConfig, corrupt

    seq = load_motion(getattr(args, "in"))
    rng = np.random.Generator(np.random.PCG64(args.seed))
    noisy = corrupt(seq, NoiseConfig(scale=args.scale), rng)
    save_motion(noisy, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_sweep(args) -> int:
    from .codec import load_codec
    from .robustness import save_sweep_report, sweep

    seqs, _ = _load_motion_dir(args.corpus)
    codec = load_codec(args.codec)
    scales = [float(s) for s in args.scales.split(",")]
    result = sweep(seqs, codec, scales=scales, seed=args.seed)
    for row in result.rows():
        print(" ".join(f"{k}={v:.6g}" for k, v in row.items()))
    if args.report:
        save_sweep_report(result, args.report)
        print(f"wrote {args.report}")
    return 0


def cmd_serve(args) -> int:
    from .causal import load_causal
    from .codec import load_codec
    from .config import load_config
    from .generator import load_ngram
    from .streaming.server import MotionServer, ServerConfig
    from .vocab import load_text_vocab

    if args.config:
        cfg = load_config(args.config)
        if args.bind is None:
            args.bind = f"{cfg['streaming']['host']}:{cfg['streaming']['port']}"
        args.chunk_tokens = args.chunk_tokens or cfg["streaming"]["chunk_tokens"]
        args.vocab = args.vocab or (cfg["paths"]["vocab_file"] or None)
        args.music_codec = args.music_codec or (cfg["paths"]["music_codec_file"] or None)
        args.codec = args.codec or (cfg["paths"]["causal_file"] or None)
        args.model = args.model or (cfg["paths"]["model_file"] or None)
    if args.bind is None:
        args.bind = "127.0.0.1:8765"
    if not args.codec or not args.model:
        raise UserError("serve needs --codec and --model (flags or [paths] in --config)")
    host, port = _parse_bind(args.bind)
    console_dir = None
    if args.console:
        console_dir = args.console_dir or str(Path(__file__).parent / "console")
        if not Path(console_dir).is_dir():
            raise UserError(f"console assets not found at {console_dir}")
    config = ServerConfig(host=host, port=port, chunk_tokens=args.chunk_tokens, max_tokens=args.max_len, temperature=args.temperature, console_dir=console_dir)
    server = MotionServer(
        config,
        load_ngram(args.model),
        load_causal(args.codec),
        text_vocab=load_text_vocab(args.vocab) if args.vocab else None,
        music_codec=load_codec(args.music_codec) if args.music_codec else None,
        base_seed=args.seed,
    )
    host, port = server.start()
    print(f"serving on {host}:{port}" + (f" (console at http://{host}:{port}/)" if console_dir else ""), flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def cmd_client(args) -> int:
    from .motion import MotionSequence, save_motion
    from .streaming.client import StreamClient, measure_latency

    host, port = _parse_bind(args.connect)
    client = StreamClient(host, port, session=args.session).connect()
    text = args.text
    trajectory = Path(args.traj).read_text() if args.traj else None
    music = Path(args.music).read_text() if args.music else None
    if text is None and trajectory is None and music is None:
        raise UserError("give --text, --traj, or --music")
    if args.timing:
        tb = measure_latency(client, text=text, trajectory=trajectory, music=music)
        for k, v in tb.as_dict().items():
            print(f"{k} {v:.3f}")
    else:
        client.instruction(text=text, trajectory=trajectory, music=music)
    frames = np.array(client.frames, dtype=np.float64)
    print(f"received {len(frames)} frames")
    if args.out and len(frames):
        seq = MotionSequence(50.0, frames[:, 7:], frames[:, 0:3], frames[:, 3:7])
        save_motion(seq, args.out)
        print(f"wrote {args.out}")
    client.close()
    return 0


def cmd_eval(args) -> int:
    from .kinematics import default_model, mpjpe
    from .metrics import diversity, fid, features, genre_score, mm_dist, r_precision, root_rmse, success_rate
    from .tracking import simulate_track

    preds, pred_files = _load_motion_dir(args.pred)
    refs, ref_files = _load_motion_dir(args.ref)
    if len(preds) != len(refs):
        raise UserError(f"pred has {len(preds)} files, ref has {len(refs)}")
    wanted = args.metrics.split(",")
    pf = np.array([features(s) for s in preds])
    rf = np.array([features(s) for s in refs])
    rng = np.random.Generator(np.random.PCG64(args.seed))
    lines = []
    for m in wanted:
        if m == "fid":
            lines.append(f"fid {fid(pf, rf):.6f}")
        elif m == "div":
            lines.append(f"diversity {diversity(pf, rng=rng):.6f}")
        elif m == "mmd":
            lines.append(f"mm_dist {mm_dist(pf, rf):.6f}")
        elif m == "rprec":
            for k in (1, 2, 3):
                lines.append(f"r_precision@{k} {r_precision(pf, rf, k, rng=rng):.2f}")
        elif m == "rmse":
            vals = [root_rmse(p, r.root_pos, r.fps) for p, r in zip(preds, refs)]
            lines.append(f"root_rmse {np.mean(vals):.6f}")
        elif m == "genre":
            groups = {}
            for f, feat in zip(pred_files, pf):
                genre = f.stem.split("__")[0]
                groups.setdefault(genre, []).append(feat)
            if len(groups) >= 2 and all(len(v) >= 2 for v in groups.values()):
                lines.append(f"genre {genre_score(groups):.6f}")
            else:
                lines.append("genre skipped (need genre__name.motion files, >=2 genres x >=2 samples)")
        elif m == "success":
            trials = []
            for p, r in zip(preds, refs):
                n = min(len(p), len(r))
                tracked, res = simulate_track(p.slice(0, n), compute_rewards=False)
                res.mpjpe_cm = mpjpe(tracked, r.slice(0, n), default_model())
                res.root_rmse_m = root_rmse(p.slice(0, n), r.root_pos[:n], r.fps)
                trials.append(res)
            lines.append(f"success_rate {success_rate(trials, args.task):.2f}")
        else:
            raise UserError(f"unknown metric {m!r}")
    report = "\n".join(lines)
    print(report)
    if args.report:
        Path(args.report).write_text(report + "\n")
    return 0


def cmd_selftest(args) -> int:
    import time

    from .codec import CodecConfig, code_index, gradient_check, index_code
    from .codec.model import init_params
    from .causal import CausalConfig, StreamState, decode_stream, flush, init_causal_params, push_tokens
    from .streaming.wire import WireMessage, decode_message, encode_message
    from .vocab import EOM, MOTION_START, SOM, TRAJ_START, from_global, to_global

    failures = []

    t0 = time.time()
    levels = (8, 8, 8, 6, 5)
    idx = np.arange(15360)
    codes = index_code(idx, levels)
    ok = bool(np.array_equal(code_index(codes, levels), idx))
    print(f"fsq bijection (15,360 codes): {'ok' if ok else 'FAIL'} [{time.time() - t0:.2f}s]")
    if not ok:
        failures.append("bijection")

    t0 = time.time()
    cfg = CodecConfig(hidden_channels=16, group_norm_groups=4)
    params = init_params(cfg, seed=1, zero_out_proj=False)
    rng = np.random.Generator(np.random.PCG64(0))
    err = gradient_check(params, rng.normal(0, 0.3, (1, 8, 29)), epsilon=1e-4, samples_per_tensor=4)
    print(f"gradient check (max rel err {err:.2e} < 1e-4): {'ok' if err < 1e-4 else 'FAIL'} [{time.time() - t0:.2f}s]")
    if err >= 1e-4:
        failures.append("gradient")

    t0 = time.time()
    ccfg = CausalConfig(hidden=16, layers=1)
    cparams = init_causal_params(ccfg, seed=2, zero_out=False)
    ok = True
    for trial in range(100):
        toks = rng.integers(0, ccfg.codebook_size, size=int(rng.integers(1, 40)))
        full = decode_stream(toks, cparams)
        state = StreamState(cparams)
        parts = []
        i = 0
        while i < len(toks):
            j = i + int(rng.integers(1, 8))
            parts.append(push_tokens(state, toks[i:j]))
            i = j
        parts.append(flush(state))
        if not np.array_equal(full, np.concatenate(parts)):
            ok = False
            break
    print(f"causality (100 random partitions bit-exact): {'ok' if ok else 'FAIL'} [{time.time() - t0:.2f}s]")
    if not ok:
        failures.append("causality")

    ok = to_global("motion", 0) == MOTION_START and from_global(EOM) == ("eom", 0) and to_global("trajectory", 59) == TRAJ_START + 59 and from_global(SOM) == ("som", 0)
    print(f"vocabulary layout: {'ok' if ok else 'FAIL'}")
    if not ok:
        failures.append("vocab")

    msg = WireMessage("MOTION_CHUNK", 1, "s", 12.3456789012, {"fps": 50.0, "first_frame_index": 0, "frames": [[0.123456789012] * 36]})
    ok = encode_message(decode_message(encode_message(msg))) == encode_message(msg)
    print(f"wire roundtrip: {'ok' if ok else 'FAIL'}")
    if not ok:
        failures.append("wire")

    if failures:
        print(f"selftest FAILED: {', '.join(failures)}")
        return INTERNAL_ERROR
    print("selftest ok")
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="motionstream", description="Motion tokenization and streaming engine")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, **kw)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("train-codec", cmd_train_codec, help="train the FSQ codec")
    sp.add_argument("--corpus", help="directory of .motion (or .music) files")
    sp.add_argument("--synth", type=int, default=0, help="train on N synthetic sinusoid sequences instead")
    sp.add_argument("--synth-length", type=int, default=128)
    sp.add_argument("--music", action="store_true", help="music codec mode (35-dim features, 6,144 codes)")
    sp.add_argument("--out", required=True)
    sp.add_argument("--steps", type=int, default=20000)
    sp.add_argument("--batch", type=int, default=8)
    sp.add_argument("--window", type=int, default=64)
    sp.add_argument("--lr", type=float, default=2e-3)
    sp.add_argument("--optimizer", default="adam", choices=["sgd", "adam"])
    sp.add_argument("--hidden", type=int, default=48)
    sp.add_argument("--downsample", type=int, default=2)
    sp.add_argument("--dtype", default="f4", choices=["f4", "f8"])
    sp.add_argument("--eval-every", type=int, default=250)
    sp.add_argument("--target-rms", type=float, default=0.10)
    sp.add_argument("--log-every", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("train-causal", cmd_train_causal, help="train the causal streaming decoder")
    sp.add_argument("--codec", required=True)
    sp.add_argument("--corpus")
    sp.add_argument("--synth", type=int, default=0)
    sp.add_argument("--synth-length", type=int, default=128)
    sp.add_argument("--out", required=True)
    sp.add_argument("--hidden", type=int, default=64)
    sp.add_argument("--layers", type=int, default=2)
    sp.add_argument("--kernel", type=int, default=7)
    sp.add_argument("--steps", type=int, default=1500)
    sp.add_argument("--batch", type=int, default=8)
    sp.add_argument("--lr", type=float, default=2e-3)
    sp.add_argument("--log-every", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("train-gen", cmd_train_gen, help="train the n-gram generator")
    sp.add_argument("--tokens", required=True, help="token corpus file")
    sp.add_argument("--order", type=int, default=4)
    sp.add_argument("--discount", type=float, default=0.5)
    sp.add_argument("--out", required=True)

    sp = add("tokenize", cmd_tokenize, help="tokenize one input (or build a token corpus)")
    sp.add_argument("--traj")
    sp.add_argument("--music")
    sp.add_argument("--motion")
    sp.add_argument("--motion-dir", help="tokenize a directory into a SOM/EOM-wrapped token corpus")
    sp.add_argument("--corpus-out")
    sp.add_argument("--text")
    sp.add_argument("--codec")
    sp.add_argument("--vocab")

    sp = add("generate", cmd_generate, help="generate motion tokens from conditions")
    sp.add_argument("--model", required=True)
    sp.add_argument("--text")
    sp.add_argument("--traj")
    sp.add_argument("--vocab")
    sp.add_argument("--causal")
    sp.add_argument("--out")
    sp.add_argument("--max-len", type=int, default=250)
    sp.add_argument("--chunk-tokens", type=int, default=5)
    sp.add_argument("--temperature", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("augment", cmd_augment, help="motion-matching expansion")
    sp.add_argument("--library", required=True, help="directory of motion files")
    sp.add_argument("--minutes", type=float, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--qc-report")
    sp.add_argument("--history-capacity", type=int, default=8)
    sp.add_argument("--max-dof-delta", type=float, default=0.35)
    sp.add_argument("--max-root-jump", type=float, default=0.05)

    sp = add("corrupt", cmd_corrupt, help="apply the three-component noise model")
    sp.add_argument("--in", dest="in", required=True)
    sp.add_argument("--scale", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = add("sweep", cmd_sweep, help="noise-scale denoising sweep")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--codec", required=True)
    sp.add_argument("--scales", default="1,2,4,8")
    sp.add_argument("--report")
    sp.add_argument("--seed", type=int, default=0)

    sp = add("serve", cmd_serve, help="run the streaming server")
    sp.add_argument("--bind", default=None)
    sp.add_argument("--config", help="run-config file supplying paths and streaming settings")
    sp.add_argument("--codec", help="causal decoder parameter file")
    sp.add_argument("--model", help="n-gram model file")
    sp.add_argument("--vocab")
    sp.add_argument("--music-codec")
    sp.add_argument("--chunk-tokens", type=int, default=5)
    sp.add_argument("--max-len", type=int, default=250)
    sp.add_argument("--temperature", type=float, default=1.0)
    sp.add_argument("--console", action="store_true", help="serve the operator console assets")
    sp.add_argument("--console-dir")
    sp.add_argument("--seed", type=int, default=0)

    sp = add("client", cmd_client, help="send an instruction and play the stream")
    sp.add_argument("--connect", required=True)
    sp.add_argument("--text")
    sp.add_argument("--traj")
    sp.add_argument("--music")
    sp.add_argument("--out")
    sp.add_argument("--timing", action="store_true")
    sp.add_argument("--session", default="cli")

    sp = add("eval", cmd_eval, help="metric suite over prediction/reference dirs")
    sp.add_argument("--pred", required=True)
    sp.add_argument("--ref", required=True)
    sp.add_argument("--metrics", default="fid,div,mmd,rprec,rmse,genre,success")
    sp.add_argument("--task", default="text", choices=["text", "trajectory", "music"])
    sp.add_argument("--report")
    sp.add_argument("--seed", type=int, default=0)

    add("selftest", cmd_selftest, help="run the property self-test gate")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else USER_ERROR
    try:
        return args.fn(args)
    except (UserError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USER_ERROR
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return USER_ERROR
    except KeyboardInterrupt:
        return USER_ERROR
    except Exception as e:  # internal
        log.exception("internal error")
        print(f"internal error: {e}", file=sys.stderr)
        return INTERNAL_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
