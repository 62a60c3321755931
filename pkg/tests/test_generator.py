import numpy as np
import pytest

from motionstream.generator import (
    GenerationError,
    GenerationSession,
    NgramModel,
    SequenceLayout,
    assemble,
    generate,
    load_ngram,
    load_token_corpus,
    next_token,
    perplexity,
    save_ngram,
    save_token_corpus,
    train_ngram,
)
from motionstream.vocab import DELIMITERS, EOM, MOTION_START, SOM, VOCAB_TOTAL


def motion(*locals_):
    return [MOTION_START + i for i in locals_]


def simple_layout(motion_locals, conditions=None):
    rng = np.random.Generator(np.random.PCG64(0))
    return assemble(conditions or {}, motion_locals, window=5, rng=rng)


class TestAssemble:
    def test_no_conditions(self):
        layout = simple_layout([0, 1])
        assert layout.flatten() == [SOM, MOTION_START, MOTION_START + 1, EOM]

    def test_music_window_uniform_start(self):
        music = [145_439 + i for i in range(100)]
        starts = set()
        for seed in range(300):
            rng = np.random.Generator(np.random.PCG64(seed))
            layout = assemble({"music": music}, [0], window=30, rng=rng)
            seg = layout.segments[0]
            assert len(seg.tokens) == 30
            starts.add(seg.tokens[0] - 145_439)
        assert min(starts) == 0 and max(starts) == 70
        assert len(starts) > 50  # spread over the admissible range

    def test_window_too_large(self):
        rng = np.random.Generator(np.random.PCG64(0))
        with pytest.raises(ValueError):
            assemble({"music": [145_439] * 10}, [0], window=11, rng=rng)

    def test_delimiters_balanced(self):
        rng = np.random.Generator(np.random.PCG64(0))
        layout = assemble({"text": [5, 6], "music": [145_439] * 8, "trajectory": [151_583] * 8}, [0], window=4, rng=rng)
        flat = layout.flatten()
        for modality, (o, c) in DELIMITERS.items():
            assert flat.count(o) == 1 and flat.count(c) == 1
            assert flat.index(o) < flat.index(c)
        assert flat.index(SOM) == len(flat) - 3
        assert flat.count(EOM) == 1

    def test_text_never_windowed(self):
        rng = np.random.Generator(np.random.PCG64(0))
        layout = assemble({"text": list(range(40))}, [0], window=5, rng=rng)
        assert len(layout.segments[0].tokens) == 40


class TestTrainNgram:
    def test_counting_oracle(self):
        corpus = [simple_layout([0, 1, 0, 1]) for _ in range(50)]
        model = train_ngram(corpus, order=2)
        a, b = MOTION_START, MOTION_START + 1
        p = model.distribution([a], support=np.array([b]))
        assert p[0] > 0.9

    def test_unseen_context_backs_off_positive(self):
        model = train_ngram([simple_layout([0, 1])], order=3)
        p = model.distribution([999, 888], support=np.array([MOTION_START + 7]))
        assert p[0] > 0.0

    def test_distribution_sums_to_one(self):
        model = train_ngram([simple_layout([0, 1, 2])] * 3, order=3)
        for ctx in ([], [SOM], [MOTION_START], [12345, SOM]):
            p = model.distribution(ctx)
            assert abs(p.sum() - 1.0) < 1e-9

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            train_ngram([], order=2)


class TestNextToken:
    def test_argmax_limit(self):
        corpus = [simple_layout([0, 1, 0, 1]) for _ in range(20)]
        model = train_ngram(corpus, order=2)
        rng = np.random.Generator(np.random.PCG64(0))
        tok, p = next_token(model, [MOTION_START], rng, temperature=0.0)
        assert tok == MOTION_START + 1
        assert p == 1.0

    def test_seeded_reproducible(self):
        model = train_ngram([simple_layout([0, 1, 2, 3])] * 5, order=3)
        seqs = []
        for _ in range(2):
            rng = np.random.Generator(np.random.PCG64(77))
            seqs.append([next_token(model, [SOM], rng, 1.0)[0] for _ in range(20)])
        assert seqs[0] == seqs[1]

    def test_probability_in_range(self, rng):
        model = train_ngram([simple_layout([0, 1])] * 3, order=2)
        for _ in range(20):
            _, p = next_token(model, [SOM], rng, temperature=0.7)
            assert 0.0 < p <= 1.0


class TestGenerate:
    def test_single_token_corpus(self):
        model = train_ngram([simple_layout([4])] * 200, order=3)
        session = GenerationSession(seed=0, max_len=50)
        out = generate(model, session, [], temperature=0.0)
        assert out == [4]

    def test_cap_without_eom(self):
        # uniform untrained model under masking never has EOM dominate; cap applies
        model = NgramModel(order=2)
        session = GenerationSession(seed=1, max_len=5)
        out = generate(model, session, [], temperature=1.0)
        assert len(out) <= 5
        if len(out) == 5:
            assert all(0 <= t < 15360 for t in out)

    def test_only_motion_or_eom_emitted(self):
        model = NgramModel(order=2)
        session = GenerationSession(seed=3, max_len=200)
        out = generate(model, session, [], temperature=1.0)
        assert all(0 <= t < 15360 for t in out)

    def test_history_contract(self):
        model = train_ngram([simple_layout(list(range(20)))] * 30, order=3)
        session = GenerationSession(seed=5, max_len=40)
        first = generate(model, session, [], temperature=0.5)
        assert len(first) >= 1
        prev_globals = [MOTION_START + t for t in first]
        generate(model, session, [], temperature=0.5)
        k = min(10, len(prev_globals))
        assert session.last_context[:k] == prev_globals[-k:]

    def test_history_shorter_than_ten(self):
        model = train_ngram([simple_layout([7])] * 100, order=2)
        session = GenerationSession(seed=0, max_len=5)
        first = generate(model, session, [], temperature=0.0)
        assert first == [7]
        generate(model, session, [], temperature=0.0)
        assert session.last_context[:1] == [MOTION_START + 7]


class TestPerplexity:
    def test_uniform_model_equals_vocab_size(self):
        model = NgramModel(order=2)
        ppl = perplexity(model, [simple_layout([0, 1, 2])])
        assert abs(ppl - VOCAB_TOTAL) < 1e-6

    def test_deterministic_corpus_near_one(self):
        corpus = [simple_layout([0, 1, 2, 3, 4, 5, 6, 7])] * 400
        model = train_ngram(corpus, order=3)
        ppl = perplexity(model, corpus[:5])
        assert ppl < 1.5

    def test_bounded_by_vocab_on_training_data(self):
        # a distribution with min P >= 1/V summing to 1 is necessarily uniform,
        # so the <= V bound is asserted where it is realizable: on data whose
        # contexts the model has seen, and on fully unseen contexts where the
        # backoff falls through to exactly uniform
        corpus = [simple_layout([0, 1, 2, 3])] * 10
        model = train_ngram(corpus, order=3)
        assert perplexity(model, corpus[:3]) <= VOCAB_TOTAL + 1e-6
        untrained = NgramModel(order=3)
        assert abs(perplexity(untrained, [simple_layout([9, 8, 7])]) - VOCAB_TOTAL) < 1e-6

    def test_trained_beats_uniform(self):
        corpus = [simple_layout([i % 6 for i in range(12)])] * 50
        model = train_ngram(corpus, order=3)
        uniform = NgramModel(order=2)
        assert perplexity(model, corpus[:10]) < perplexity(uniform, corpus[:10])

    def test_empty_heldout(self):
        with pytest.raises(ValueError):
            perplexity(NgramModel(order=2), [])


class TestFiles:
    def test_model_roundtrip(self, tmp_path):
        corpus = [simple_layout([0, 1, 2])] * 5
        model = train_ngram(corpus, order=3, discount=0.4)
        f = tmp_path / "m.ngram"
        save_ngram(model, f)
        back = load_ngram(f)
        assert back.order == 3 and back.discount == 0.4
        for ctx in ([], [SOM], [MOTION_START, MOTION_START + 1]):
            assert np.allclose(model.distribution(ctx), back.distribution(ctx))

    def test_token_corpus_roundtrip(self, tmp_path):
        corpus = [simple_layout([0, 1]), simple_layout([3])]
        f = tmp_path / "c.tokens"
        save_token_corpus(corpus, f)
        back = load_token_corpus(f)
        assert back == [c.flatten() for c in corpus]
