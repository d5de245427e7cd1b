import numpy as np
import pytest

from mi2das.classifiers import (
    ClassifierKind,
    GbtHyper,
    KnnHyper,
    LogRegHyper,
    RfHyper,
    SvmHyper,
    train_classifier,
)
from mi2das.classifiers.gbt import fit_gbt
from mi2das.classifiers.knn import KnnState
from mi2das.classifiers.linear import LogRegState, loss_and_grad
from mi2das.classifiers.tree import ClassificationTree, GradientTree
from mi2das.labels import ClassLabel, code_of

from oracles import finite_diff_grad, softmax_xent_grad_hess

A, B, C = ClassLabel.BACKDOOR, ClassLabel.DDOS_HTTP, ClassLabel.DDOS_ICMP


def blobs(n_per=40, centers=((0, 0), (8, 0), (0, 8)), seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([np.asarray(c) + rng.normal(size=(n_per, 2)) for c in centers])
    y = np.concatenate([[code_of(c)] * n_per for c in (A, B, C)[: len(centers)]])
    return X, y


class TestCart:
    def test_pure_leaf_distribution(self):
        X = np.array([[0.0], [1.0], [10.0], [11.0]])
        y = np.array([0, 0, 1, 1])
        tree = ClassificationTree(n_classes=2).fit(X, y)
        assert np.allclose(tree.predict_proba(np.array([[0.5]]))[0], [1.0, 0.0])
        assert np.allclose(tree.predict_proba(np.array([[10.5]]))[0], [0.0, 1.0])

    def test_no_split_on_constant_features(self):
        X = np.ones((10, 3))
        y = np.array([0] * 5 + [1] * 5)
        tree = ClassificationTree(n_classes=2).fit(X, y)
        assert np.allclose(tree.predict_proba(X[:1])[0], [0.5, 0.5])


class TestRandomForest:
    def test_single_tree_no_bootstrap_equals_cart(self):
        X, y = blobs()
        y_local = np.searchsorted(np.unique(y), y)
        model = train_classifier(
            ClassifierKind.RANDOM_FOREST,
            X,
            y,
            hyper=RfHyper(n_trees=1, bootstrap=False, max_features=None),
            seed=3,
        )
        tree = ClassificationTree(n_classes=3).fit(X, y_local)
        assert np.allclose(model.predict_proba_batch(X), tree.predict_proba(X))

    def test_separable_blobs_perfect(self):
        X, y = blobs()
        model = train_classifier(ClassifierKind.RANDOM_FOREST, X, y, hyper=RfHyper(n_trees=25), seed=0)
        assert model.predict_batch(X) == [ClassLabel(l.value) for l in model.predict_batch(X)]
        acc = np.mean([p == t for p, t in zip(model.predict_batch(X), [A] * 40 + [B] * 40 + [C] * 40)])
        assert acc > 0.99

    def test_determinism(self):
        X, y = blobs(seed=4)
        m1 = train_classifier(ClassifierKind.RANDOM_FOREST, X, y, hyper=RfHyper(n_trees=10), seed=9)
        m2 = train_classifier(ClassifierKind.RANDOM_FOREST, X, y, hyper=RfHyper(n_trees=10), seed=9)
        assert np.array_equal(m1.predict_proba_batch(X), m2.predict_proba_batch(X))


class TestGbt:
    def test_first_round_newton_leaves_hand_computed(self):
        # 4-sample, 2-class toy; uniform prior means p = 0.5 everywhere.
        X = np.array([[0.0], [1.0], [10.0], [11.0]])
        y = np.array([0, 0, 1, 1])
        onehot = np.zeros((4, 2))
        onehot[np.arange(4), y] = 1.0
        g_ref, h_ref = softmax_xent_grad_hess(np.zeros((4, 2)), onehot)
        l2 = 1.0
        # Hand Newton step for the class-0 tree, split between x=1 and x=10:
        GL, HL = g_ref[:2, 0].sum(), h_ref[:2, 0].sum()
        GR, HR = g_ref[2:, 0].sum(), h_ref[2:, 0].sum()
        left_value = -GL / (HL + l2)
        right_value = -GR / (HR + l2)
        state = fit_gbt(X, y, 2, GbtHyper(n_rounds=1, max_depth=1, learning_rate=1.0, l2=l2))
        tree0 = state.rounds[0][0]
        pred = tree0.predict(X)
        assert pred[0] == pytest.approx(left_value, abs=1e-12)
        assert pred[3] == pytest.approx(right_value, abs=1e-12)
        assert left_value == pytest.approx(2.0 / 3.0)

    def test_loss_non_increasing(self):
        X, y = blobs(seed=5)
        state = fit_gbt(X, np.searchsorted(np.unique(y), y), 3, GbtHyper(n_rounds=15, max_depth=3))
        assert (np.diff(state.loss_history) <= 1e-12).all()

    def test_proba_simplex_and_accuracy(self):
        X, y = blobs(seed=6)
        model = train_classifier(ClassifierKind.GBT, X, y, hyper=GbtHyper(n_rounds=20, max_depth=3), seed=0)
        P = model.predict_proba_batch(X)
        assert np.allclose(P.sum(axis=1), 1.0, atol=1e-9)
        assert (P >= 0).all()
        preds = model.predict_batch(X)
        truth = [A] * 40 + [B] * 40 + [C] * 40
        assert np.mean([p == t for p, t in zip(preds, truth)]) > 0.99


class TestGradientTreeRegressor:
    def test_leaf_value_is_newton_step(self):
        X = np.ones((6, 1))  # unsplittable: single leaf
        g = np.array([1.0, 2.0, -1.0, 0.5, 0.0, 1.5])
        h = np.array([0.2, 0.3, 0.1, 0.4, 0.2, 0.3])
        tree = GradientTree(max_depth=3, l2=0.7).fit(X, g, h)
        assert tree.predict(X)[0] == pytest.approx(-g.sum() / (h.sum() + 0.7), abs=1e-12)


class TestLogReg:
    def test_zero_weights_give_uniform(self):
        state = LogRegState(W=np.zeros((4, 3)), b=np.zeros(3), converged=True)
        P = state.predict_proba(np.random.default_rng(0).normal(size=(5, 4)))
        assert np.allclose(P, 1.0 / 3.0, atol=1e-12)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(12, 3))
        y = rng.integers(0, 3, size=12)
        Y = np.zeros((12, 3))
        Y[np.arange(12), y] = 1.0
        theta = rng.normal(size=3 * 3 + 3) * 0.5
        _, grad = loss_and_grad(theta, X, Y, l2=0.01)
        num = finite_diff_grad(lambda t: loss_and_grad(t, X, Y, 0.01)[0], theta)
        assert np.max(np.abs(grad - num)) / max(np.max(np.abs(num)), 1.0) < 1e-5

    def test_separable_1d_perfect(self):
        X = np.concatenate([np.linspace(0, 1, 20), np.linspace(10, 11, 20)]).reshape(-1, 1)
        y = np.array([code_of(A)] * 20 + [code_of(B)] * 20)
        model = train_classifier(ClassifierKind.LOGREG, X, y, hyper=LogRegHyper(l2=1e-6))
        preds = model.predict_batch(X)
        assert all(p == A for p in preds[:20]) and all(p == B for p in preds[20:])


class TestSvm:
    def test_separable_blobs(self):
        X, y = blobs(seed=8)
        model = train_classifier(ClassifierKind.SVM, X, y, hyper=SvmHyper(C=1.0, tol=1e-4), seed=0)
        truth = [A] * 40 + [B] * 40 + [C] * 40
        acc = np.mean([p == t for p, t in zip(model.predict_batch(X), truth)])
        assert acc > 0.99
        P = model.predict_proba_batch(X[:7])
        assert np.allclose(P.sum(axis=1), 1.0, atol=1e-9)

    def test_binary_margin_geometry_linear(self):
        # Two 1-D points at -1 and +1: max-margin boundary at 0.
        X = np.array([[-1.0], [1.0]])
        y = np.array([code_of(A), code_of(B)])
        model = train_classifier(ClassifierKind.SVM, X, y, hyper=SvmHyper(C=10.0, kernel="linear", tol=1e-6))
        dv = model.state.decision_values(np.array([[0.0]]))
        assert abs(dv[0, 0]) < 1e-6 and abs(dv[0, 1]) < 1e-6

    def test_determinism(self):
        X, y = blobs(seed=9)
        m1 = train_classifier(ClassifierKind.SVM, X, y, hyper=SvmHyper(), seed=1)
        m2 = train_classifier(ClassifierKind.SVM, X, y, hyper=SvmHyper(), seed=1)
        assert np.array_equal(m1.predict_proba_batch(X), m2.predict_proba_batch(X))


class TestKnn:
    def test_vote_fractions(self):
        X = np.array([[0.0], [0.1], [0.2], [5.0]])
        y = np.array([code_of(A), code_of(A), code_of(B), code_of(B)])
        model = train_classifier(ClassifierKind.KNN, X, y, hyper=KnnHyper(k=3))
        p = model.predict_proba(np.array([0.05]))
        assert p[model.classes.index(A)] == pytest.approx(2.0 / 3.0)
        assert p[model.classes.index(B)] == pytest.approx(1.0 / 3.0)

    def test_k1_self_prediction_matches_nearest_neighbor_oracle(self):
        rng = np.random.default_rng(10)
        X = rng.normal(size=(60, 3))
        y = rng.integers(0, 3, size=60)
        for i in range(len(X)):
            rest = np.delete(np.arange(len(X)), i)
            state = KnnState(X=X[rest], y=y[rest], k=1, n_classes=3)
            pred = int(np.argmax(state.predict_proba(X[i : i + 1])[0]))
            d = np.sum((X[rest] - X[i]) ** 2, axis=1)
            assert pred == y[rest][int(np.argmin(d))]


class TestContract:
    def test_single_class_rejected(self):
        X = np.zeros((5, 2))
        y = np.full(5, code_of(A))
        with pytest.raises(ValueError):
            train_classifier(ClassifierKind.KNN, X, y)

    def test_label_outside_known_set_rejected(self):
        X, y = blobs()
        with pytest.raises(ValueError):
            train_classifier(ClassifierKind.KNN, X, y, classes=[A, B])

    def test_unknown_never_a_class(self):
        X, y = blobs()
        with pytest.raises(ValueError):
            train_classifier(ClassifierKind.KNN, X, y, classes=[A, B, ClassLabel.UNKNOWN])

    def test_tie_breaks_to_lowest_index(self):
        X = np.array([[0.0], [1.0]])
        y = np.array([code_of(A), code_of(B)])
        model = train_classifier(ClassifierKind.KNN, X, y, hyper=KnnHyper(k=2))
        # Both neighbors vote once: exact tie -> first class in order.
        assert model.predict(np.array([0.5])) == model.classes[0]

    @pytest.mark.parametrize("kind,hyper", [
        (ClassifierKind.KNN, KnnHyper(k=4)),
        (ClassifierKind.LOGREG, LogRegHyper()),
        (ClassifierKind.RANDOM_FOREST, RfHyper(n_trees=8)),
        (ClassifierKind.GBT, GbtHyper(n_rounds=5, max_depth=3)),
        (ClassifierKind.SVM, SvmHyper(tol=1e-3)),
    ])
    def test_probability_simplex_fuzz(self, kind, hyper):
        rng = np.random.default_rng(11)
        X, y = blobs(seed=12)
        model = train_classifier(kind, X, y, hyper=hyper, seed=2)
        Q = rng.normal(scale=6.0, size=(50, 2))
        P = model.predict_proba_batch(Q)
        assert np.allclose(P.sum(axis=1), 1.0, atol=1e-9)
        assert (P >= -1e-12).all()
