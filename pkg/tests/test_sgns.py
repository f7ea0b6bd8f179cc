import numpy as np
import pytest

from weightwalk.errors import DegenerateParams, NonFiniteUpdate
from weightwalk.generators import gen_er
from weightwalk.graph import build_graph
from weightwalk.sgns import (
    EmbeddingMatrix,
    TrainConfig,
    _sg_walk,
    _unigram_lookup,
    build_noise_table,
    init_embeddings,
    sgns_pair_loss,
    train,
)
from weightwalk.walks import WalkConfig, WalkCorpus, build_corpus


def corpus_from_rows(rows, n_nodes, walk_length=None):
    """Hand-built corpus for trainer tests."""
    walk_length = walk_length or max(len(r) for r in rows)
    walks = np.full((len(rows), walk_length), -1, dtype=np.int32)
    lengths = np.zeros(len(rows), dtype=np.int32)
    for j, row in enumerate(rows):
        walks[j, : len(row)] = row
        lengths[j] = len(row)
    return WalkCorpus(walks, lengths, n_nodes, "test", WalkConfig("rw", 1, max(walk_length, 2)))


class TestInitEmbeddings:
    def test_input_bounds(self):
        emb = init_embeddings(3, TrainConfig(dim=4, seed=0))
        assert np.abs(emb.input_vectors).max() <= 0.5 / 4
        assert emb.input_vectors.shape == (3, 4)

    def test_output_zero(self):
        emb = init_embeddings(5, TrainConfig(dim=8, seed=1))
        assert not emb.output_vectors.any()

    def test_deterministic(self):
        a = init_embeddings(6, TrainConfig(dim=16, seed=2))
        b = init_embeddings(6, TrainConfig(dim=16, seed=2))
        assert np.array_equal(a.input_vectors, b.input_vectors)


class TestNoiseTable:
    def test_uniform_frequencies_give_uniform_noise(self):
        corpus = corpus_from_rows([[0, 1, 2, 3]], 4)
        table = build_noise_table(corpus)
        assert np.allclose(table.probabilities, 0.25, atol=1e-12)

    def test_three_quarter_power_rule(self):
        # frequencies {16, 1} -> {16^0.75, 1} / Z = {8/9, 1/9}
        corpus = corpus_from_rows([[0] * 16 + [1]], 2)
        table = build_noise_table(corpus)
        assert table.probabilities[0] == pytest.approx(8 / 9, rel=1e-12)
        assert table.probabilities[1] == pytest.approx(1 / 9, rel=1e-12)

    def test_absent_node_zero_probability(self):
        corpus = corpus_from_rows([[0, 1]], 4)
        table = build_noise_table(corpus)
        assert table.probabilities[2] == 0.0
        assert table.probabilities[3] == 0.0
        draws = table.sample(np.random.default_rng(0), 1000)
        assert set(np.unique(draws)) <= {0, 1}

    def test_lookup_table_matches_probabilities(self):
        corpus = corpus_from_rows([[0] * 30 + [1] * 10 + [2]], 3)
        table = build_noise_table(corpus)
        lookup = _unigram_lookup(table.cumulative, min_size=1 << 16)
        frac = np.bincount(lookup, minlength=3) / lookup.shape[0]
        assert np.allclose(frac, table.probabilities, atol=1e-3)

    def test_truncated_rows_not_counted(self):
        corpus = corpus_from_rows([[0, 1, 2], [3]], 4, walk_length=3)
        table = build_noise_table(corpus)
        # node 3 appears once, padding (-1) never counted
        assert table.probabilities[3] > 0
        assert table.probabilities.sum() == pytest.approx(1.0)


class TestPairLoss:
    def test_orthogonal_pair_loss(self):
        c = np.array([1.0, 0.0])
        ctx = np.array([0.0, 1.0])
        loss, _ = sgns_pair_loss(c, ctx, [])
        assert loss == pytest.approx(np.log(2), rel=1e-12)

    def test_orthogonal_negative_adds_log2(self):
        c = np.array([1.0, 0.0])
        ctx = np.array([0.0, 1.0])
        neg = np.array([[0.0, 2.0]])
        loss, _ = sgns_pair_loss(c, ctx, neg)
        assert loss == pytest.approx(2 * np.log(2), rel=1e-12)

    @pytest.mark.parametrize("dim", [2, 8, 32])
    def test_gradients_match_finite_differences(self, dim):
        rng = np.random.default_rng(dim)
        h = 1e-5
        for _ in range(34):
            c = rng.normal(size=dim)
            ctx = rng.normal(size=dim)
            negs = rng.normal(size=(3, dim))
            _, (gc, gx, gn) = sgns_pair_loss(c, ctx, negs)

            def loss_at(c=c, ctx=ctx, negs=negs):
                return sgns_pair_loss(c, ctx, negs)[0]

            for k in range(dim):
                e = np.zeros(dim)
                e[k] = h
                num = (loss_at(c=c + e) - loss_at(c=c - e)) / (2 * h)
                assert num == pytest.approx(gc[k], rel=1e-4, abs=1e-7)
                num = (loss_at(ctx=ctx + e) - loss_at(ctx=ctx - e)) / (2 * h)
                assert num == pytest.approx(gx[k], rel=1e-4, abs=1e-7)
            for i in range(negs.shape[0]):
                for k in range(0, dim, max(1, dim // 4)):
                    dn = negs.copy()
                    dn[i, k] += h
                    up = loss_at(negs=dn)
                    dn[i, k] -= 2 * h
                    dn_loss = loss_at(negs=dn)
                    assert (up - dn_loss) / (2 * h) == pytest.approx(gn[i, k], rel=1e-4, abs=1e-7)

    def test_extreme_dots_stay_finite(self):
        c = np.full(4, 100.0)
        loss, (gc, gx, gn) = sgns_pair_loss(c, c, [-c])
        assert np.isfinite(loss)
        assert np.isfinite(gc).all()


class TestKernelMatchesReference:
    """The numba update must apply exactly the sgns_pair_loss gradients."""

    def run_kernel_once(self, inp, out, noise_table, negatives, lr):
        scratch = np.array([0, 1], dtype=np.int32)
        work = np.empty(inp.shape[1], dtype=np.float32)
        state = np.uint64(123)
        _sg_walk(scratch, 2, inp, out, noise_table, 1, negatives, lr, state, work, False)

    def test_positive_only_update(self):
        cfg = TrainConfig(dim=8, window=1, seed=3)
        emb = init_embeddings(2, cfg)
        inp = emb.input_vectors.copy()
        out = (emb.output_vectors + 0.01).astype(np.float32)  # nonzero so gradients flow
        lr = 0.1
        exp_inp = inp.astype(np.float64).copy()
        exp_out = out.astype(np.float64).copy()
        # pairs (0 -> 1) then (1 -> 0), sequential SGD
        for center, ctx in ((0, 1), (1, 0)):
            _, (gc, gx, _) = sgns_pair_loss(exp_inp[center], exp_out[ctx], [])
            exp_out[ctx] -= lr * gx
            exp_inp[center] -= lr * gc
        table = np.zeros(1 << 4, dtype=np.int32)  # unused with negatives=0
        self.run_kernel_once(inp, out, table, 0, lr)
        assert np.allclose(inp, exp_inp, atol=1e-6)
        assert np.allclose(out, exp_out, atol=1e-6)

    def test_update_with_forced_negative(self):
        cfg = TrainConfig(dim=8, window=1, seed=4)
        emb = init_embeddings(3, cfg)
        inp = emb.input_vectors.copy()
        out = (emb.input_vectors[::-1] * 0.5).astype(np.float32).copy()
        lr = 0.05
        table = np.full(1 << 4, 2, dtype=np.int32)  # every draw is node 2
        exp_inp = inp.astype(np.float64).copy()
        exp_out = out.astype(np.float64).copy()
        for center, ctx in ((0, 1), (1, 0)):
            _, (gc, gx, gn) = sgns_pair_loss(exp_inp[center], exp_out[ctx], [exp_out[2]])
            exp_out[ctx] -= lr * gx
            exp_out[2] -= lr * gn[0]
            exp_inp[center] -= lr * gc
        self.run_kernel_once(inp, out, table, 1, lr)
        assert np.allclose(inp, exp_inp, atol=1e-6)
        assert np.allclose(out, exp_out, atol=1e-6)

    def test_negative_equal_to_context_is_skipped(self):
        cfg = TrainConfig(dim=8, window=1, seed=5)
        emb = init_embeddings(2, cfg)
        inp = emb.input_vectors.copy()
        out = (emb.input_vectors * 0.5).astype(np.float32).copy()
        lr = 0.05
        exp_inp = inp.astype(np.float64).copy()
        exp_out = out.astype(np.float64).copy()
        # every draw is node 1: for pair (0 -> 1) that equals the context and
        # must be skipped, so the center-0 update is the pure positive one
        _, (gc, _, _) = sgns_pair_loss(exp_inp[0], exp_out[1], [])
        exp_inp[0] -= lr * gc
        table = np.full(1 << 4, 1, dtype=np.int32)
        self.run_kernel_once(inp, out, table, 1, lr)
        assert np.allclose(inp[0], exp_inp[0], atol=1e-6)


class TestTrain:
    def test_singleton_corpus_returns_initialization(self):
        corpus = corpus_from_rows([[0], [1], [2]], 3, walk_length=4)
        cfg = TrainConfig(dim=8, epochs=3, seed=6)
        emb = train(corpus, cfg)
        ref = init_embeddings(3, cfg)
        assert np.array_equal(emb.input_vectors, ref.input_vectors)
        assert np.array_equal(emb.output_vectors, ref.output_vectors)

    def test_two_node_path_cosine_rises_from_initialization(self):
        # with the default window the two nodes share overlapping contexts,
        # so their cosine climbs well above the random-init value at every
        # epoch checkpoint (it fluctuates near equilibrium, not monotonically)
        g = build_graph([(0, 1, 1.0)], 2)
        corpus = build_corpus(g, WalkConfig("rw", walks_per_node=8, walk_length=32, seed=7))
        cosines = []

        def checkpoint(epoch, vecs):
            a, b = vecs[0].astype(float), vecs[1].astype(float)
            cosines.append(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))

        cfg = TrainConfig(dim=8, epochs=5, seed=8)
        init = init_embeddings(2, cfg)
        a, b = init.input_vectors.astype(float)
        start = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
        train(corpus, cfg, on_epoch_end=checkpoint)
        assert len(cosines) == 5
        assert all(c > start for c in cosines)
        assert cosines[0] > start + 0.1

    def test_deterministic_bit_identical(self):
        g = gen_er(30, 4, "uniform", seed=9)
        corpus = build_corpus(g, WalkConfig("wrw", walks_per_node=4, walk_length=16, seed=10))
        cfg = TrainConfig(dim=16, epochs=2, seed=11)
        a = train(corpus, cfg)
        b = train(corpus, cfg)
        assert np.array_equal(a.input_vectors, b.input_vectors)
        assert np.array_equal(a.output_vectors, b.output_vectors)

    def test_epoch_loss_non_increasing(self):
        # after the first-epoch drop the loss sits at equilibrium with ~0.3%
        # jitter; an inversion only counts when it exceeds a 1% noise band
        g = gen_er(50, 6, "uniform", seed=12)
        corpus = build_corpus(g, WalkConfig("wrw", walks_per_node=8, walk_length=32, seed=13))
        emb = train(corpus, TrainConfig(dim=16, epochs=5, seed=14), collect_loss=True)
        losses = emb.epoch_mean_loss
        assert len(losses) == 5
        inversions = sum(1 for a, b in zip(losses[:-1], losses[1:]) if b > a * 1.01)
        assert inversions <= 1
        assert min(losses) < losses[0]
        assert losses[-1] < losses[0] * 1.01

    def test_untouched_rows_keep_initialization(self):
        # nodes 3 and 4 never appear in the corpus
        corpus = corpus_from_rows([[0, 1, 2, 0, 1]], 5)
        cfg = TrainConfig(dim=8, epochs=2, seed=15)
        emb = train(corpus, cfg)
        ref = init_embeddings(5, cfg)
        assert np.array_equal(emb.input_vectors[3:], ref.input_vectors[3:])
        assert np.array_equal(emb.output_vectors[3:], ref.output_vectors[3:])
        assert not np.array_equal(emb.input_vectors[0], ref.input_vectors[0])

    def test_never_cooccurring_nodes_near_zero_cosine(self):
        # two disjoint paths walked separately: cross-component cosine stays small
        g = build_graph([(0, 1, 1.0), (2, 3, 1.0)], 4)
        corpus = build_corpus(g, WalkConfig("rw", walks_per_node=32, walk_length=64, seed=16))
        emb = train(corpus, TrainConfig(dim=64, epochs=5, seed=17))
        x = emb.input_vectors.astype(float)
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        cross = [abs(x[a] @ x[b]) for a in (0, 1) for b in (2, 3)]
        assert np.mean(cross) < 0.1

    def test_nonfinite_initial_raises(self):
        corpus = corpus_from_rows([[0, 1, 0, 1]], 2)
        cfg = TrainConfig(dim=4, epochs=1, seed=18)
        bad = init_embeddings(2, cfg)
        bad.input_vectors[0, 0] = np.inf
        with pytest.raises(NonFiniteUpdate):
            train(corpus, cfg, initial=bad)

    def test_empty_corpus_rejected(self):
        corpus = corpus_from_rows([[0]], 1)
        empty = WalkCorpus(
            corpus.walks[:0], corpus.lengths[:0], 1, "x", WalkConfig("rw")
        )
        with pytest.raises(DegenerateParams):
            train(empty, TrainConfig(dim=4))

    def test_parallel_mode_trains(self):
        g = gen_er(40, 6, "uniform", seed=19)
        corpus = build_corpus(g, WalkConfig("wrw", walks_per_node=8, walk_length=32, seed=20))
        emb = train(corpus, TrainConfig(dim=16, epochs=3, seed=21, workers=2))
        assert np.isfinite(emb.input_vectors).all()
        # parallel training should still pull adjacent nodes together
        x = emb.input_vectors.astype(float)
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        edge_cos = np.mean([x[u] @ x[v] for u, v in zip(g.edges_u, g.edges_v)])
        rng = np.random.default_rng(22)
        rand_pairs = rng.integers(0, 40, size=(200, 2))
        rand_cos = np.mean([x[a] @ x[b] for a, b in rand_pairs if a != b])
        assert edge_cos > rand_cos

    def test_cbow_smoke(self):
        g = gen_er(40, 6, "uniform", seed=23)
        corpus = build_corpus(g, WalkConfig("wrw", walks_per_node=8, walk_length=32, seed=23))
        cfg = TrainConfig(dim=16, epochs=3, seed=24, architecture="cbow")
        emb = train(corpus, cfg)
        assert np.isfinite(emb.input_vectors).all()
        x = emb.input_vectors.astype(float)
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        edge_cos = np.mean([x[u] @ x[v] for u, v in zip(g.edges_u, g.edges_v)])
        rng = np.random.default_rng(25)
        rand_pairs = rng.integers(0, 40, size=(200, 2))
        rand_cos = np.mean([x[a] @ x[b] for a, b in rand_pairs if a != b])
        assert edge_cos > rand_cos
        again = train(corpus, cfg)
        assert np.array_equal(emb.input_vectors, again.input_vectors)

    def test_subsample_smoke(self):
        g = gen_er(30, 4, "uniform", seed=25)
        corpus = build_corpus(g, WalkConfig("wrw", walks_per_node=4, walk_length=16, seed=26))
        emb = train(corpus, TrainConfig(dim=8, epochs=2, seed=27, subsample=1e-3))
        assert np.isfinite(emb.input_vectors).all()

    def test_export_csv(self, tmp_path):
        emb = init_embeddings(3, TrainConfig(dim=4, seed=28))
        out = tmp_path / "emb.csv"
        emb.export_csv(out)
        lines = out.read_text().splitlines()
        assert lines[0] == "node_id,dim_0,dim_1,dim_2,dim_3"
        assert len(lines) == 4
        assert lines[1].split(",")[0] == "0"


def test_config_validation():
    with pytest.raises(DegenerateParams):
        TrainConfig(dim=1)
    with pytest.raises(DegenerateParams):
        TrainConfig(window=0)
    with pytest.raises(DegenerateParams):
        TrainConfig(negatives=0)
    with pytest.raises(DegenerateParams):
        TrainConfig(epochs=0)
    with pytest.raises(DegenerateParams):
        TrainConfig(initial_lr=0)
    with pytest.raises(DegenerateParams):
        TrainConfig(architecture="glove")
