#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "bcp/binary.hpp"
#include "bcp/cli.hpp"
#include "bcp/cluster.hpp"
#include "bcp/eval.hpp"
#include "bcp/expressiveness.hpp"
#include "bcp/model_io.hpp"
#include "bcp/train.hpp"
#include "bcp/vq.hpp"

namespace py = pybind11;
using namespace bcp;

namespace {

py::array_t<double> to_numpy(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) view(r, c) = m(r, c);
    return out;
}

void from_numpy(Matrix& m, const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(0)) != m.rows() ||
        static_cast<std::size_t>(a.shape(1)) != m.cols())
        throw std::invalid_argument("array shape does not match the factor matrix");
    auto view = a.unchecked<2>();
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = view(r, c);
}

py::array_t<bool> bits_to_numpy(const BitMatrix& m) {
    py::array_t<bool> out({m.rows(), m.dim()});
    auto view = out.mutable_unchecked<2>();
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t d = 0; d < m.dim(); ++d) view(r, d) = m.test(r, d);
    return out;
}

std::vector<std::tuple<EntityId, EntityId, RelationId>> triples_of(std::span<const Triple> ts) {
    std::vector<std::tuple<EntityId, EntityId, RelationId>> out;
    out.reserve(ts.size());
    for (const auto& t : ts) out.emplace_back(t.subject, t.object, t.relation);
    return out;
}

Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "valid") return Split::Valid;
    if (s == "test") return Split::Test;
    throw std::invalid_argument("split must be train, valid or test");
}

Scorer scorer_of(const Model& m) {
    return std::visit([](const auto& f) { return make_scorer(f); }, m);
}

py::dict rank_dict(const RankReport& r) {
    py::dict d;
    d["mrr"] = r.mrr;
    for (const auto& [n, h] : r.hits) d[py::str("hits@" + std::to_string(n))] = h;
    d["n_queries"] = r.n_queries;
    return d;
}

}  // namespace

PYBIND11_MODULE(_bcp, m) {
    m.doc() = "Binarized CP decomposition for knowledge graph completion";

    py::enum_<ModelKind>(m, "ModelKind")
        .value("CP", ModelKind::CP)
        .value("DistMult", ModelKind::DistMult)
        .value("BCP", ModelKind::BCP)
        .value("BDistMult", ModelKind::BDistMult);

    py::class_<TripleStore>(m, "TripleStore")
        .def_property_readonly("num_entities", &TripleStore::num_entities)
        .def_property_readonly("num_relations", &TripleStore::num_relations)
        .def_property_readonly("augmented", &TripleStore::augmented)
        .def("triples", [](const TripleStore& s, const std::string& split) { return triples_of(s.split(parse_split(split))); },
             py::arg("split") = "train", "list of (subject, object, relation) ids")
        .def("is_known_fact", [](const TripleStore& s, EntityId i, EntityId j, RelationId k) { return s.is_known_fact(i, j, k); })
        .def("entity_label", [](const TripleStore& s, EntityId e) { return s.vocab().entity_label(e); })
        .def("relation_label", [](const TripleStore& s, RelationId r) { return s.vocab().relation_label(r); });

    m.def("load_dataset", [](const std::filesystem::path& dir) { return load_dataset(dir).store; }, py::arg("path"),
          "Load train.txt / valid.txt / test.txt from a directory.");
    m.def("augment_inverse", &augment_inverse, py::arg("store"));

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("kind", &TrainConfig::kind)
        .def_readwrite("eta", &TrainConfig::eta)
        .def_readwrite("lambda_a", &TrainConfig::lambda_a)
        .def_readwrite("lambda_b", &TrainConfig::lambda_b)
        .def_readwrite("lambda_c", &TrainConfig::lambda_c)
        .def_readwrite("dim", &TrainConfig::dim)
        .def_readwrite("delta", &TrainConfig::delta)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("neg_per_pos", &TrainConfig::neg_per_pos)
        .def_readwrite("seed", &TrainConfig::seed)
        .def("validate", &TrainConfig::validate);

    py::class_<DenseFactors>(m, "DenseFactors")
        .def(py::init<ModelKind, std::size_t, std::size_t, std::size_t>(), py::arg("kind"), py::arg("num_entities"),
             py::arg("num_relations"), py::arg("dim"))
        .def_property_readonly("kind", &DenseFactors::kind)
        .def_property_readonly("dim", &DenseFactors::dim)
        .def_property_readonly("num_entities", &DenseFactors::num_entities)
        .def_property_readonly("num_relations", &DenseFactors::num_relations)
        .def_property(
            "subject", [](const DenseFactors& f) { return to_numpy(f.subject()); },
            [](DenseFactors& f, py::array_t<double, py::array::c_style | py::array::forcecast> a) { from_numpy(f.subject(), a); })
        .def_property(
            "object", [](const DenseFactors& f) { return to_numpy(f.object()); },
            [](DenseFactors& f, py::array_t<double, py::array::c_style | py::array::forcecast> a) { from_numpy(f.object(), a); })
        .def_property(
            "relation", [](const DenseFactors& f) { return to_numpy(f.relation()); },
            [](DenseFactors& f, py::array_t<double, py::array::c_style | py::array::forcecast> a) { from_numpy(f.relation(), a); })
        .def("score", [](const DenseFactors& f, EntityId i, EntityId j, RelationId k) { return score(f, i, j, k); })
        .def("__eq__", [](const DenseFactors& a, const DenseFactors& b) { return a == b; });

    py::class_<BinaryFactors>(m, "BinaryFactors")
        .def_property_readonly("kind", &BinaryFactors::kind)
        .def_property_readonly("dim", &BinaryFactors::dim)
        .def_property_readonly("delta", &BinaryFactors::delta)
        .def_property_readonly("vq", &BinaryFactors::vq)
        .def_property_readonly("scales", &BinaryFactors::scales)
        .def_property_readonly("num_entities", &BinaryFactors::num_entities)
        .def_property_readonly("num_relations", &BinaryFactors::num_relations)
        .def_property_readonly("subject_bits", [](const BinaryFactors& f) { return bits_to_numpy(f.subject()); })
        .def_property_readonly("object_bits", [](const BinaryFactors& f) { return bits_to_numpy(f.object()); })
        .def_property_readonly("relation_bits", [](const BinaryFactors& f) { return bits_to_numpy(f.relation()); })
        .def("score", [](const BinaryFactors& f, EntityId i, EntityId j, RelationId k) { return score_bitwise(f, i, j, k); },
             "bitwise score scale_product * (D - 2 BitC)")
        .def("score_float", &score_binary_float, "reference score from the expanded +-scale vectors")
        .def("__eq__", [](const BinaryFactors& a, const BinaryFactors& b) { return a == b; });

    m.def(
        "train",
        [](const TripleStore& store, const TrainConfig& config, std::size_t validate_every) {
            TrainCallbacks cb;
            cb.validate_every = validate_every;
            if (validate_every > 0 && !store.valid().empty()) {
                cb.validate = [&](const DenseFactors& f) {
                    EvalOptions o;
                    o.split = Split::Valid;
                    if (is_binarized(config.kind)) {
                        const BinaryFactors b = freeze(f, config.delta);
                        return evaluate_ranking(make_scorer(b), store, o).mrr;
                    }
                    return evaluate_ranking(make_scorer(f), store, o).mrr;
                };
            }
            TrainResult r;
            {
                py::gil_scoped_release release;
                r = train(store, config, cb);
            }
            std::vector<double> losses;
            for (const auto& s : r.history) losses.push_back(s.mean_loss);
            return py::make_tuple(r.factors, losses, r.best_epoch);
        },
        py::arg("store"), py::arg("config"), py::arg("validate_every") = 20,
        "Train latent factors. Returns (factors, per-epoch mean loss, best epoch).");

    m.def("freeze", &freeze, py::arg("factors"), py::arg("delta"));
    m.def("unpack", &unpack, py::arg("factors"));
    m.def("vq_apply", &vq_apply, py::arg("factors"));

    m.def("save_model", [](const std::filesystem::path& p, const DenseFactors& f) { save_dense(p, f); });
    m.def("save_model", [](const std::filesystem::path& p, const BinaryFactors& f) { save_binary(p, f); });
    m.def("load_model", [](const std::filesystem::path& p) -> py::object {
        return std::visit([](auto&& f) { return py::cast(std::move(f)); }, load_model(p));
    });

    m.def(
        "evaluate_ranking",
        [](const py::object& model, const TripleStore& store, const std::string& split, bool filtered,
           bool subject_via_inverse) {
            EvalOptions o;
            o.split = parse_split(split);
            o.filtered = filtered;
            o.subject_via_inverse = subject_via_inverse;
            if (py::isinstance<BinaryFactors>(model))
                return rank_dict(evaluate_ranking(make_scorer(model.cast<const BinaryFactors&>()), store, o));
            return rank_dict(evaluate_ranking(make_scorer(model.cast<const DenseFactors&>()), store, o));
        },
        py::arg("model"), py::arg("store"), py::arg("split") = "test", py::arg("filtered") = true,
        py::arg("subject_via_inverse") = false);

    m.def(
        "random_scorer_mrr",
        [](const TripleStore& store, const std::string& split, bool filtered) {
            EvalOptions o;
            o.split = parse_split(split);
            o.filtered = filtered;
            return random_scorer_mrr(store, o);
        },
        py::arg("store"), py::arg("split") = "test", py::arg("filtered") = true);

    m.def("pr_auc", [](std::vector<double> pos, std::vector<double> neg) { return pr_auc(pos, neg); },
          py::arg("positives"), py::arg("negatives"));
    m.def(
        "evaluate_pr_auc",
        [](const py::object& model, const TripleStore& store, std::uint64_t seed, const std::string& split) {
            const Model mdl = py::isinstance<BinaryFactors>(model) ? Model(model.cast<BinaryFactors>())
                                                                   : Model(model.cast<DenseFactors>());
            const PrAucReport r = evaluate_pr_auc(scorer_of(mdl), store, seed, parse_split(split));
            return py::make_tuple(r.auc, r.n_pos, r.n_neg);
        },
        py::arg("model"), py::arg("store"), py::arg("seed") = 1, py::arg("split") = "test");

    m.def(
        "bench_scoring",
        [](std::vector<std::size_t> dims, std::size_t reps, std::uint64_t seed) {
            std::vector<std::tuple<std::size_t, double, double>> out;
            for (const auto& r : bench_scoring(dims, reps, seed)) out.emplace_back(r.dim, r.float_ns, r.bitwise_ns);
            return out;
        },
        py::arg("dims"), py::arg("reps") = kMinBenchReps, py::arg("seed") = 1,
        "Returns [(D, float_ns, bitwise_ns)].");

    m.def(
        "encode",
        [](py::array_t<int, py::array::c_style | py::array::forcecast> x, double delta) {
            if (x.ndim() != 3 || x.shape(0) != x.shape(1)) throw std::invalid_argument("expected shape (N_e, N_e, N_r)");
            const auto t = BoolTensor::from_values(x.shape(0), x.shape(2),
                                                   std::span<const int>(x.data(), static_cast<std::size_t>(x.size())));
            return encode(t, delta);
        },
        py::arg("tensor"), py::arg("delta") = kExactDelta,
        "Exact binary factors for a boolean tensor indexed [subject, object, relation].");

    m.def(
        "verify_reconstruction",
        [](const BinaryFactors& f, py::array_t<int, py::array::c_style | py::array::forcecast> x) {
            if (x.ndim() != 3) throw std::invalid_argument("expected shape (N_e, N_e, N_r)");
            const auto t = BoolTensor::from_values(x.shape(0), x.shape(2),
                                                   std::span<const int>(x.data(), static_cast<std::size_t>(x.size())));
            const auto r = verify_reconstruction(f, t);
            return py::make_tuple(r.checked, r.mismatches.size());
        },
        py::arg("factors"), py::arg("tensor"), "Returns (scores checked, mismatches).");

    m.def(
        "single_linkage",
        [](const BinaryFactors& f, std::size_t k) {
            const double delta = f.vq() ? f.scales()[0] : f.delta();
            const Clustering c = single_linkage(f.subject(), delta, k);
            std::vector<std::tuple<std::size_t, std::size_t, double, std::size_t>> merges;
            for (const auto& mg : c.dendrogram.merges) merges.emplace_back(mg.a, mg.b, mg.height, mg.size);
            return py::make_tuple(c.labels, merges);
        },
        py::arg("factors"), py::arg("k"), "Cluster entity rows. Returns (labels, merges).");

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "bcp");
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command line in-process. Returns (exit code, stdout, stderr).");
}
