#include "bcp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "bcp/binary.hpp"
#include "bcp/cluster.hpp"
#include "bcp/eval.hpp"
#include "bcp/expressiveness.hpp"
#include "bcp/kg.hpp"
#include "bcp/model_io.hpp"
#include "bcp/train.hpp"
#include "bcp/vq.hpp"

namespace bcp::cli {

std::size_t default_threads() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BCP_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
        } catch (const std::exception&) {
            // unparsable value: ignore the cap
        }
    }
    return n;
}

namespace {

class UsageError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

class ShapeMismatch : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

constexpr std::size_t kMaxPrintedWarnings = 10;

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
    for (std::size_t w = 0; w < std::min(warnings.size(), kMaxPrintedWarnings); ++w) err << "warning: " << warnings[w] << '\n';
    if (warnings.size() > kMaxPrintedWarnings)
        err << "warning: ... " << (warnings.size() - kMaxPrintedWarnings) << " more\n";
}

Dataset load_data(const std::string& dir, std::ostream& err) {
    if (!std::filesystem::exists(std::filesystem::path(dir) / "train.txt"))
        throw UsageError("dataset directory '" + dir + "' has no train.txt");
    Dataset ds = load_dataset(dir);
    print_warnings(ds.warnings, err);
    return ds;
}

// Matches a dataset to a model's shape, applying inverse augmentation when
// the model carries twice the dataset's relations.
TripleStore store_for_model(TripleStore store, std::size_t model_entities, std::size_t model_relations) {
    if (model_entities != store.num_entities())
        throw ShapeMismatch("model has N_e=" + std::to_string(model_entities) + " but dataset has N_e=" +
                            std::to_string(store.num_entities()));
    if (model_relations == 2 * store.num_relations()) return augment_inverse(store);
    if (model_relations == store.num_relations()) return store;
    throw ShapeMismatch("model has N_r=" + std::to_string(model_relations) + " but dataset has N_r=" +
                        std::to_string(store.num_relations()) + " (" + std::to_string(2 * store.num_relations()) +
                        " with inverse relations)");
}

std::string fmt(double v, int precision = 6) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << v;
    return s.str();
}

std::string exact(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

// metric/value output, aligned or CSV.
class Report {
   public:
    explicit Report(bool csv) : csv_(csv) {}
    void add(std::string key, std::string value) { rows_.emplace_back(std::move(key), std::move(value)); }
    void print(std::ostream& out) const {
        if (csv_) {
            out << "metric,value\n";
            for (const auto& [k, v] : rows_) out << k << ',' << v << '\n';
            return;
        }
        std::size_t width = 0;
        for (const auto& row : rows_) width = std::max(width, row.first.size());
        for (const auto& [k, v] : rows_) out << std::left << std::setw(static_cast<int>(width + 2)) << k << v << '\n';
    }

   private:
    bool csv_;
    std::vector<std::pair<std::string, std::string>> rows_;
};

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string data;
    std::string out;
    std::string checkpoint;
    std::string resume;
    std::string kind = "cp";
    std::size_t dim = 200;
    double eta = 0.05;
    double delta = 0.5;
    std::optional<double> lambda, lambda_a, lambda_b, lambda_c;
    std::size_t neg = 5;
    std::size_t epochs = 1000;
    std::uint64_t seed = 1;
    bool no_inverse = false;
    std::size_t valid_every = 20;
    bool csv = false;
    std::size_t threads = 1;
};

void add_model_flags(CLI::App* sub, TrainArgs& a) {
    sub->add_option("--kind", a.kind, "cp | distmult | bcp | bdistmult")->capture_default_str();
    sub->add_option("--dim", a.dim, "embedding dimension D")->capture_default_str();
    sub->add_option("--eta", a.eta, "learning rate")->capture_default_str();
    sub->add_option("--delta", a.delta, "binarization scale (binarized kinds)")->capture_default_str();
    sub->add_option("--lambda", a.lambda, "L2 coefficient for A, B and C");
    sub->add_option("--lambda-a", a.lambda_a, "L2 coefficient for A (overrides --lambda)");
    sub->add_option("--lambda-b", a.lambda_b, "L2 coefficient for B (overrides --lambda)");
    sub->add_option("--lambda-c", a.lambda_c, "L2 coefficient for C (overrides --lambda)");
    sub->add_option("--neg", a.neg, "negatives per positive")->capture_default_str();
    sub->add_option("--epochs", a.epochs, "maximum epochs")->capture_default_str();
    sub->add_option("--seed", a.seed, "RNG seed")->capture_default_str();
    sub->add_flag("--no-inverse", a.no_inverse, "do not add inverse training triples");
    sub->add_option("--valid-every", a.valid_every, "validation period in epochs (0 = off)")->capture_default_str();
}

TrainConfig make_config(const TrainArgs& a) {
    TrainConfig c;
    try {
        c.kind = parse_model_kind(a.kind);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    c.dim = a.dim;
    c.eta = a.eta;
    c.delta = a.delta;
    const double base = a.lambda.value_or(0.0);
    c.lambda_a = a.lambda_a.value_or(base);
    c.lambda_b = a.lambda_b.value_or(base);
    c.lambda_c = a.lambda_c.value_or(base);
    c.neg_per_pos = a.neg;
    c.epochs = a.epochs;
    c.seed = a.seed;
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return c;
}

double validation_mrr(const DenseFactors& f, const TrainConfig& config, const TripleStore& store,
                      std::size_t threads) {
    EvalOptions opts;
    opts.split = Split::Valid;
    opts.threads = threads;
    if (is_binarized(config.kind)) {
        const BinaryFactors frozen = freeze(f, config.delta);
        return evaluate_ranking(make_scorer(frozen), store, opts).mrr;
    }
    return evaluate_ranking(make_scorer(f), store, opts).mrr;
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    const TrainConfig config = make_config(a);
    Dataset ds = load_data(a.data, err);
    TripleStore store = a.no_inverse ? std::move(ds.store) : augment_inverse(ds.store);

    std::optional<DenseFactors> initial;
    if (!a.resume.empty()) {
        if (!std::filesystem::exists(a.resume)) throw UsageError("no checkpoint at " + a.resume);
        initial = load_dense(a.resume);
    }

    TrainCallbacks cb;
    cb.validate_every = a.valid_every;
    if (a.valid_every > 0 && !store.valid().empty())
        cb.validate = [&](const DenseFactors& f) { return validation_mrr(f, config, store, a.threads); };
    if (a.csv) out << "epoch,loss,valid_mrr\n";
    cb.on_epoch = [&](const EpochStats& s) {
        if (a.csv) {
            out << s.epoch << ',' << exact(s.mean_loss) << ',' << (s.valid_mrr ? exact(*s.valid_mrr) : "") << '\n';
        } else {
            out << "epoch " << std::setw(4) << s.epoch << "  loss " << fmt(s.mean_loss);
            if (s.valid_mrr) out << "  valid_mrr " << fmt(*s.valid_mrr, 4);
            out << '\n';
        }
    };

    TrainResult result = train(store, config, cb, std::move(initial));
    if (is_binarized(config.kind)) {
        save_binary(a.out, freeze(result.factors, config.delta));
        if (!a.checkpoint.empty()) save_dense(a.checkpoint, result.factors);
    } else {
        save_dense(a.out, result.factors);
    }
    if (!a.csv) {
        out << "best_epoch " << result.best_epoch;
        if (result.best_valid_mrr) out << "  valid_mrr " << fmt(*result.best_valid_mrr, 4);
        out << "\nwrote " << a.out << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string model;
    std::string data;
    std::string split = "test";
    bool pr_auc = false;
    std::uint64_t seed = 1;
    bool csv = false;
    std::vector<int> hits{1, 3, 10};
    bool raw = false;
    bool subject_via_inverse = false;
    std::size_t threads = 1;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    if (!std::filesystem::exists(a.model)) throw UsageError("no model file at " + a.model);
    Model model = load_model(a.model);
    Dataset ds = load_data(a.data, err);

    const auto [ne, nr] = std::visit(
        [](const auto& f) { return std::pair{f.num_entities(), f.num_relations()}; }, model);
    const TripleStore store = store_for_model(std::move(ds.store), ne, nr);
    const Scorer scorer = std::visit([](const auto& f) { return make_scorer(f); }, model);

    EvalOptions opts;
    if (a.split == "test")
        opts.split = Split::Test;
    else if (a.split == "valid")
        opts.split = Split::Valid;
    else
        throw UsageError("--split must be test or valid");
    opts.hits_at = a.hits;
    opts.filtered = !a.raw;
    opts.subject_via_inverse = a.subject_via_inverse;
    opts.threads = a.threads;
    if (opts.subject_via_inverse && !store.augmented())
        throw UsageError("--subject-via-inverse needs a model trained with inverse relations");
    if (store.split(opts.split).empty()) throw std::runtime_error("split '" + a.split + "' is empty");

    const RankReport rank = evaluate_ranking(scorer, store, opts);
    Report report(a.csv);
    report.add("split", a.split);
    report.add("queries", std::to_string(rank.n_queries));
    report.add("mrr", a.csv ? exact(rank.mrr) : fmt(rank.mrr));
    for (const auto& [n, h] : rank.hits) report.add("hits@" + std::to_string(n), a.csv ? exact(h) : fmt(h));
    const double baseline = random_scorer_mrr(store, opts);
    report.add("random_mrr", a.csv ? exact(baseline) : fmt(baseline));
    if (a.pr_auc) {
        const PrAucReport pr = evaluate_pr_auc(scorer, store, a.seed, opts.split);
        report.add("pr_auc", a.csv ? exact(pr.auc) : fmt(pr.auc));
        report.add("pr_auc_pos", std::to_string(pr.n_pos));
        report.add("pr_auc_neg", std::to_string(pr.n_neg));
    }
    report.print(out);
    return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
    std::size_t dmin = 10, dmax = 1000, step = 10, reps = 100000;
    std::uint64_t seed = 1;
    bool csv = false;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    if (a.step == 0 || a.dmin == 0 || a.dmin > a.dmax) throw UsageError("need 0 < dmin <= dmax and step > 0");
    if (a.reps < kMinBenchReps) throw UsageError("--reps must be >= " + std::to_string(kMinBenchReps));
    std::vector<std::size_t> dims;
    for (std::size_t d = a.dmin; d <= a.dmax; d += a.step) dims.push_back(d);
    const auto rows = bench_scoring(dims, a.reps, a.seed);
    if (a.csv) {
        out << "D,float_ns,bitwise_ns\n";
        for (const auto& r : rows) out << r.dim << ',' << fmt(r.float_ns, 3) << ',' << fmt(r.bitwise_ns, 3) << '\n';
    } else {
        out << std::right << std::setw(6) << "D" << std::setw(14) << "float_ns" << std::setw(14) << "bitwise_ns"
            << std::setw(10) << "speedup" << '\n';
        for (const auto& r : rows)
            out << std::setw(6) << r.dim << std::setw(14) << fmt(r.float_ns, 2) << std::setw(14) << fmt(r.bitwise_ns, 2)
                << std::setw(10) << fmt(r.float_ns / r.bitwise_ns, 1) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------- encode-verify

struct EncodeArgs {
    std::size_t ne = 2, nr = 1;
    std::size_t trials = 0;
    bool exhaustive = false;
    std::uint64_t seed = 1;
    double delta = kExactDelta;
    std::size_t max_blocks = 4096;
    bool check_structure = false;
    bool csv = false;
};

constexpr std::size_t kMaxExhaustiveCells = 20;
constexpr std::size_t kMaxReportedMismatches = 10;

int cmd_encode_verify(EncodeArgs a, std::ostream& out, std::ostream& err) {
    if (a.ne == 0 || a.nr == 0) throw UsageError("--ne and --nr must be positive");
    if (a.ne * a.nr > a.max_blocks)
        throw UsageError("N_e*N_r = " + std::to_string(a.ne * a.nr) + " exceeds --max-blocks " +
                         std::to_string(a.max_blocks));
    if (!(a.delta > 0.0)) throw UsageError("--delta must be > 0");
    const std::size_t cells = a.ne * a.ne * a.nr;
    if (a.exhaustive && cells > kMaxExhaustiveCells)
        throw UsageError("--exhaustive needs N_e^2*N_r <= " + std::to_string(kMaxExhaustiveCells));
    if (!a.exhaustive && a.trials == 0) a.trials = 100;

    const EncoderLayout layout(a.ne, a.nr);
    std::size_t tensors = 0, checked = 0, mismatches = 0, structure_checks = 0, structure_violations = 0;
    std::vector<std::string> first;
    std::optional<std::string> warning;

    auto run_one = [&](const BoolTensor& x) {
        const BinaryFactors f = encode(x, a.delta);
        const auto report = verify_reconstruction(f, x);
        if (report.warning && !warning) warning = report.warning;
        checked += report.checked;
        mismatches += report.mismatches.size();
        for (const auto& m : report.mismatches) {
            if (first.size() >= kMaxReportedMismatches) break;
            std::ostringstream s;
            s << "tensor " << tensors << " (" << m.i << "," << m.j << "," << m.k << ") expected " << m.expected
              << " got " << exact(m.score);
            first.push_back(s.str());
        }
        if (a.check_structure) {
            const auto structure = check_block_structure(f, layout);
            structure_checks += structure.checks;
            structure_violations += structure.violations.size();
            for (const auto& v : structure.violations) {
                if (first.size() >= kMaxReportedMismatches) break;
                first.push_back("tensor " + std::to_string(tensors) + " structure: " + v);
            }
        }
        ++tensors;
    };

    if (a.exhaustive)
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells); ++mask)
            run_one(BoolTensor::from_mask(a.ne, a.nr, mask));
    Rng rng(a.seed);
    for (std::size_t t = 0; t < a.trials; ++t) run_one(BoolTensor::random(a.ne, a.nr, rng));

    if (warning) err << "warning: " << *warning << '\n';
    Report report(a.csv);
    report.add("tensors", std::to_string(tensors));
    report.add("n_e", std::to_string(a.ne));
    report.add("n_r", std::to_string(a.nr));
    report.add("dimension", std::to_string(layout.dim()));
    report.add("scores_checked", std::to_string(checked));
    report.add("mismatches", std::to_string(mismatches));
    if (a.check_structure) {
        report.add("structure_checks", std::to_string(structure_checks));
        report.add("structure_violations", std::to_string(structure_violations));
    }
    report.print(out);
    if (!a.csv) {
        for (const auto& line : first) out << "  " << line << '\n';
        out << "result: " << mismatches << " mismatches";
        if (a.check_structure) out << ", " << structure_violations << " structure violations";
        out << '\n';
    }
    return mismatches == 0 && structure_violations == 0 ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- cluster

struct ClusterArgs {
    std::string model;
    std::string data;
    std::size_t k = 5;
    std::optional<double> delta;
    std::string dendrogram;
    bool csv = false;
};

int cmd_cluster(const ClusterArgs& a, std::ostream& out, std::ostream& err) {
    if (!std::filesystem::exists(a.model)) throw UsageError("no model file at " + a.model);
    Model model = load_model(a.model);
    BinaryFactors bits;
    if (auto* dense = std::get_if<DenseFactors>(&model)) {
        if (!a.delta) throw UsageError("clustering a dense model needs --delta to binarize it");
        bits = freeze(*dense, *a.delta);
    } else {
        bits = std::get<BinaryFactors>(std::move(model));
    }
    const double delta = a.delta.value_or(bits.scales()[0] > 0.0 ? bits.scales()[0] : 1.0);
    if (a.k < 1 || a.k > bits.num_entities())
        throw UsageError("--k must be in [1, " + std::to_string(bits.num_entities()) + "]");

    std::optional<Vocab> vocab;
    if (!a.data.empty()) {
        Dataset ds = load_data(a.data, err);
        if (ds.store.num_entities() != bits.num_entities())
            throw ShapeMismatch("model has N_e=" + std::to_string(bits.num_entities()) + " but dataset has N_e=" +
                                std::to_string(ds.store.num_entities()));
        vocab = ds.store.vocab();
    }

    const Clustering result = single_linkage(bits.subject(), delta, a.k);
    if (a.csv) out << "entity,cluster\n";
    for (std::size_t e = 0; e < result.labels.size(); ++e) {
        const std::string name = vocab ? vocab->entity_label(static_cast<EntityId>(e)) : std::to_string(e);
        out << name << (a.csv ? ',' : '\t') << result.labels[e] << '\n';
    }
    if (!a.dendrogram.empty()) {
        std::ofstream dump(a.dendrogram);
        if (!dump) throw UsageError("cannot write " + a.dendrogram);
        dump << "a,b,height,size\n";
        for (const auto& m : result.dendrogram.merges)
            dump << m.a << ',' << m.b << ',' << exact(m.height) << ',' << m.size << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------- quantize

struct QuantizeArgs {
    std::string model;
    std::string out;
    bool csv = false;
};

int cmd_quantize(const QuantizeArgs& a, std::ostream& out) {
    if (!std::filesystem::exists(a.model)) throw UsageError("no model file at " + a.model);
    Model model = load_model(a.model);
    const auto* dense = std::get_if<DenseFactors>(&model);
    if (!dense) throw UsageError("quantize needs a dense (BCPD) model");
    const BinaryFactors vq = vq_apply(*dense);
    save_binary(a.out, vq);
    Report report(a.csv);
    report.add("alpha_a", exact(vq.scales()[0]));
    report.add("alpha_b", exact(vq.scales()[1]));
    report.add("alpha_c", exact(vq.scales()[2]));
    report.add("bytes_dense", std::to_string(std::filesystem::file_size(a.model)));
    report.add("bytes_vq", std::to_string(std::filesystem::file_size(a.out)));
    report.print(out);
    return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    TrainArgs base;
    std::vector<double> lambda_grid{0.0, 0.0001};
    std::vector<double> eta_grid{0.025, 0.05};
    std::vector<std::size_t> dim_grid{200, 400};
    std::vector<double> delta_grid{0.3, 0.5};
    bool tie_lambdas = false;
    std::size_t max_points = 256;
    std::string out;
};

struct SweepPoint {
    TrainConfig config;
    double valid_mrr = 0.0;
    std::size_t best_epoch = 0;
    std::string error;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    const TrainConfig base = make_config(a.base);
    for (const auto* grid : {&a.lambda_grid, &a.eta_grid, &a.delta_grid})
        if (grid->empty()) throw UsageError("sweep grids must be nonempty");
    if (a.dim_grid.empty()) throw UsageError("sweep grids must be nonempty");

    Dataset ds = load_data(a.base.data, err);
    const TripleStore store = a.base.no_inverse ? std::move(ds.store) : augment_inverse(ds.store);
    if (store.valid().empty()) throw UsageError("sweep needs a nonempty valid.txt for model selection");

    std::vector<std::array<double, 3>> lambdas;
    for (double la : a.lambda_grid) {
        if (a.tie_lambdas) {
            lambdas.push_back({la, la, la});
            continue;
        }
        for (double lb : a.lambda_grid)
            for (double lc : a.lambda_grid) lambdas.push_back({la, lb, lc});
    }
    const std::vector<double> deltas = is_binarized(base.kind) ? a.delta_grid : std::vector<double>{base.delta};

    std::vector<SweepPoint> points;
    for (std::size_t dim : a.dim_grid)
        for (double eta : a.eta_grid)
            for (const auto& lam : lambdas)
                for (double delta : deltas) {
                    TrainConfig c = base;
                    c.dim = dim;
                    c.eta = eta;
                    c.lambda_a = lam[0];
                    c.lambda_b = lam[1];
                    c.lambda_c = lam[2];
                    c.delta = delta;
                    try {
                        c.validate();
                    } catch (const std::invalid_argument& e) {
                        throw UsageError(std::string("grid point invalid: ") + e.what());
                    }
                    points.push_back({c, 0.0, 0, {}});
                }
    if (points.size() > a.max_points)
        throw UsageError("grid has " + std::to_string(points.size()) + " points, above --max-points " +
                         std::to_string(a.max_points));

    const std::size_t validate_every = a.base.valid_every > 0 ? a.base.valid_every : base.epochs;
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t p = next++; p < points.size(); p = next++) {
            SweepPoint& pt = points[p];
            TrainCallbacks cb;
            cb.validate_every = validate_every;
            cb.validate = [&](const DenseFactors& f) { return validation_mrr(f, pt.config, store, 1); };
            try {
                const TrainResult r = train(store, pt.config, cb);
                pt.valid_mrr = r.best_valid_mrr.value_or(0.0);
                pt.best_epoch = r.best_epoch;
            } catch (const std::exception& e) {
                pt.error = e.what();
            }
            std::lock_guard lock(log_mutex);
            err << "sweep point " << (p + 1) << "/" << points.size() << " done\n";
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(a.base.threads, points.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::ofstream file;
    if (!a.out.empty()) {
        file.open(a.out);
        if (!file) throw UsageError("cannot write " + a.out);
    }
    std::ostream& csv = a.out.empty() ? out : file;
    csv << "kind,dim,eta,lambda_a,lambda_b,lambda_c,delta,best_epoch,valid_mrr,error\n";
    const SweepPoint* best = nullptr;
    for (const auto& pt : points) {
        const auto& c = pt.config;
        csv << to_string(c.kind) << ',' << c.dim << ',' << c.eta << ',' << c.lambda_a << ',' << c.lambda_b << ','
            << c.lambda_c << ',' << c.delta << ',' << pt.best_epoch << ',' << exact(pt.valid_mrr) << ',' << pt.error
            << '\n';
        if (pt.error.empty() && (!best || pt.valid_mrr > best->valid_mrr)) best = &pt;
    }
    if (!best) {
        err << "error: every grid point failed\n";
        return kExitFailure;
    }
    if (!a.out.empty()) {
        const auto& c = best->config;
        out << "best dim=" << c.dim << " eta=" << c.eta << " lambda=(" << c.lambda_a << "," << c.lambda_b << ","
            << c.lambda_c << ")";
        if (is_binarized(c.kind)) out << " delta=" << c.delta;
        out << " valid_mrr=" << fmt(best->valid_mrr, 4) << " epoch=" << best->best_epoch << '\n';
    }
    return kExitOk;
}


// ---------------------------------------------------------------- config

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Replaces `--config FILE` after the subcommand with the file's key=value
// pairs as flags. Keys given explicitly on the command line win.
std::vector<std::string> expand_config(const CLI::App& app, const std::vector<std::string>& args) {
    if (args.size() < 2) return args;
    const CLI::App* sub = app.get_subcommand_no_throw(args[1]);
    if (!sub) return args;

    std::vector<std::string> rest;
    std::optional<std::string> file;
    for (std::size_t n = 2; n < args.size(); ++n) {
        if (args[n] == "--config") {
            if (n + 1 >= args.size()) throw UsageError("--config needs a file name");
            file = args[++n];
        } else if (args[n].rfind("--config=", 0) == 0) {
            file = args[n].substr(9);
        } else {
            rest.push_back(args[n]);
        }
    }
    if (!file) return args;

    std::ifstream in(*file);
    if (!in) throw UsageError("cannot read config file " + *file);
    std::vector<std::string> out{args[0], args[1]};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#' || text[0] == ';' || text[0] == '[') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw UsageError(*file + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(std::string_view(text).substr(0, eq));
        std::string value = trim(std::string_view(text).substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string flag = "--" + key;
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        if (!opt || key == "config") throw UsageError(*file + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        const bool overridden = std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (overridden) continue;
        if (opt->get_expected_min() == 0) {
            if (value == "true" || value == "1" || value == "yes") out.push_back(flag);
            continue;
        }
        out.push_back(flag);
        if (opt->get_items_expected_max() > 1) {
            // list keys: "lambda_grid = 0.0001, 0.001 0.01"
            std::replace(value.begin(), value.end(), ',', ' ');
            std::istringstream items(value);
            for (std::string item; items >> item;) out.push_back(item);
        } else {
            out.push_back(value);
        }
    }
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Binarized CP decomposition for knowledge graph completion"};
    app.require_subcommand(1);
    const std::size_t threads = default_threads();
    std::string config_file;  // consumed by expand_config before parsing

    TrainArgs train_args;
    train_args.threads = threads;
    auto* train_cmd = app.add_subcommand("train", "train a CP/DistMult/B-CP/B-DistMult model");
    train_cmd->add_option("--config", config_file, "key=value file; flags override it");
    train_cmd->add_option("--data", train_args.data, "dataset directory with train.txt")->required();
    train_cmd->add_option("--out", train_args.out, "output model file")->required();
    add_model_flags(train_cmd, train_args);
    train_cmd->add_option("--checkpoint", train_args.checkpoint, "also save latent real factors (binarized kinds)");
    train_cmd->add_option("--resume", train_args.resume, "start from a latent-factor checkpoint");
    train_cmd->add_flag("--csv", train_args.csv, "per-epoch CSV output");

    EvalArgs eval_args;
    eval_args.threads = threads;
    auto* eval_cmd = app.add_subcommand("eval", "filtered MRR/Hits@N and optional PR-AUC");
    eval_cmd->add_option("--config", config_file, "key=value file; flags override it");
    eval_cmd->add_option("--model", eval_args.model, "model file (BCPD or BCPB)")->required();
    eval_cmd->add_option("--data", eval_args.data, "dataset directory")->required();
    eval_cmd->add_option("--split", eval_args.split, "test | valid")->capture_default_str();
    eval_cmd->add_flag("--pr-auc", eval_args.pr_auc, "also compute PR-AUC with generated negatives");
    eval_cmd->add_option("--seed", eval_args.seed, "seed for PR-AUC negatives")->capture_default_str();
    eval_cmd->add_option("--hits", eval_args.hits, "Hits@N cutoffs")->delimiter(',');
    eval_cmd->add_flag("--raw", eval_args.raw, "unfiltered ranking (debug)");
    eval_cmd->add_flag("--subject-via-inverse", eval_args.subject_via_inverse,
                       "rank subject queries through the inverse relation");
    eval_cmd->add_flag("--csv", eval_args.csv, "metric,value CSV output");

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "float vs bitwise scoring time per score");
    bench_cmd->add_option("--dmin", bench_args.dmin)->capture_default_str();
    bench_cmd->add_option("--dmax", bench_args.dmax)->capture_default_str();
    bench_cmd->add_option("--step", bench_args.step)->capture_default_str();
    bench_cmd->add_option("--reps", bench_args.reps)->capture_default_str();
    bench_cmd->add_option("--seed", bench_args.seed)->capture_default_str();
    bench_cmd->add_flag("--csv", bench_args.csv, "D,float_ns,bitwise_ns CSV output");

    EncodeArgs enc_args;
    auto* enc_cmd = app.add_subcommand("encode-verify", "exact binary encoding of boolean tensors, verified");
    enc_cmd->add_option("--ne", enc_args.ne, "entities")->capture_default_str();
    enc_cmd->add_option("--nr", enc_args.nr, "relations")->capture_default_str();
    enc_cmd->add_option("--trials", enc_args.trials, "random tensors (default 100 unless --exhaustive)");
    enc_cmd->add_flag("--exhaustive", enc_args.exhaustive, "enumerate every boolean tensor of the shape");
    enc_cmd->add_option("--seed", enc_args.seed)->capture_default_str();
    enc_cmd->add_option("--delta", enc_args.delta, "block scale (exact only at 0.5)")->capture_default_str();
    enc_cmd->add_option("--max-blocks", enc_args.max_blocks, "cap on N_e*N_r")->capture_default_str();
    enc_cmd->add_flag("--check-structure", enc_args.check_structure, "also audit the block structure");
    enc_cmd->add_flag("--csv", enc_args.csv, "metric,value CSV output");

    ClusterArgs cl_args;
    auto* cl_cmd = app.add_subcommand("cluster", "single-linkage clustering of binary entity vectors");
    cl_cmd->add_option("--model", cl_args.model, "model file")->required();
    cl_cmd->add_option("--data", cl_args.data, "dataset directory for entity labels");
    cl_cmd->add_option("--k", cl_args.k, "number of clusters")->capture_default_str();
    cl_cmd->add_option("--delta", cl_args.delta, "scale (required to binarize a dense model)");
    cl_cmd->add_option("--dendrogram", cl_args.dendrogram, "write merges as CSV");
    cl_cmd->add_flag("--csv", cl_args.csv, "entity,cluster CSV output");

    QuantizeArgs q_args;
    auto* q_cmd = app.add_subcommand("quantize", "VQ-binarize a dense model");
    q_cmd->add_option("--model", q_args.model, "dense model file")->required();
    q_cmd->add_option("--out", q_args.out, "output BCPB file")->required();
    q_cmd->add_flag("--csv", q_args.csv, "metric,value CSV output");

    SweepArgs sw_args;
    sw_args.base.threads = threads;
    auto* sw_cmd = app.add_subcommand("sweep", "grid search selected by filtered validation MRR");
    sw_cmd->add_option("--config", config_file, "key=value file; flags override it");
    sw_cmd->add_option("--data", sw_args.base.data, "dataset directory")->required();
    add_model_flags(sw_cmd, sw_args.base);
    sw_cmd->add_option("--lambda-grid", sw_args.lambda_grid, "values for each of lambda_A, lambda_B, lambda_C")
        ->delimiter(',');
    sw_cmd->add_flag("--tie-lambdas", sw_args.tie_lambdas, "use lambda_A = lambda_B = lambda_C");
    sw_cmd->add_option("--eta-grid", sw_args.eta_grid)->delimiter(',');
    sw_cmd->add_option("--dim-grid", sw_args.dim_grid)->delimiter(',');
    sw_cmd->add_option("--delta-grid", sw_args.delta_grid, "binarized kinds only")->delimiter(',');
    sw_cmd->add_option("--max-points", sw_args.max_points, "cap on grid size")->capture_default_str();
    sw_cmd->add_option("--out", sw_args.out, "results CSV (default stdout)");

    std::vector<std::string> expanded;
    try {
        expanded = expand_config(app, args);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    std::vector<const char*> argv;
    argv.reserve(expanded.size());
    for (const auto& s : expanded) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        err << "run with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train_args, out, err);
        if (eval_cmd->parsed()) return cmd_eval(eval_args, out, err);
        if (bench_cmd->parsed()) return cmd_bench(bench_args, out);
        if (enc_cmd->parsed()) return cmd_encode_verify(enc_args, out, err);
        if (cl_cmd->parsed()) return cmd_cluster(cl_args, out, err);
        if (q_cmd->parsed()) return cmd_quantize(q_args, out);
        if (sw_cmd->parsed()) return cmd_sweep(sw_args, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace bcp::cli
