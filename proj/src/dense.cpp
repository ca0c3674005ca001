#include "bcp/dense.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace bcp {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::CP: return "cp";
        case ModelKind::DistMult: return "distmult";
        case ModelKind::BCP: return "bcp";
        case ModelKind::BDistMult: return "bdistmult";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    std::string norm;
    for (char ch : name) {
        if (ch == '-' || ch == '_') continue;
        norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    if (norm == "cp") return ModelKind::CP;
    if (norm == "distmult") return ModelKind::DistMult;
    if (norm == "bcp") return ModelKind::BCP;
    if (norm == "bdistmult") return ModelKind::BDistMult;
    throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

DenseFactors::DenseFactors(ModelKind kind, std::size_t num_entities, std::size_t num_relations,
                           std::size_t dim)
    : kind_(kind),
      dim_(dim),
      subject_(num_entities, dim),
      object_(is_tied(kind) ? 0 : num_entities, is_tied(kind) ? 0 : dim),
      relation_(num_relations, dim) {}

void DenseFactors::check_indices(EntityId i, EntityId j, RelationId k) const {
    if (i >= num_entities() || j >= num_entities()) throw std::out_of_range("entity index out of range");
    if (k >= num_relations()) throw std::out_of_range("relation index out of range");
}

bool DenseFactors::all_finite() const {
    auto finite = [](const Matrix& m) {
        return std::all_of(m.values().begin(), m.values().end(), [](double v) { return std::isfinite(v); });
    };
    return finite(subject_) && finite(object_) && finite(relation_);
}

void TrainConfig::validate() const {
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be > 0");
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (lambda_a < 0.0 || lambda_b < 0.0 || lambda_c < 0.0) throw std::invalid_argument("lambdas must be >= 0");
    if (epochs > kMaxEpochs) throw std::invalid_argument("epochs must be <= " + std::to_string(kMaxEpochs));
    if (neg_per_pos < 1) throw std::invalid_argument("neg_per_pos must be >= 1");
    if (is_binarized(kind) && !(delta > 0.0)) throw std::invalid_argument("delta must be > 0 for binarized kinds");
}

double init_bound(std::size_t dim) { return std::sqrt(6.0) / std::sqrt(2.0 * static_cast<double>(dim)); }

DenseFactors init_factors(const TrainConfig& config, std::size_t num_entities, std::size_t num_relations,
                          Rng& rng) {
    if (num_entities == 0 || num_relations == 0) throw std::invalid_argument("counts must be positive");
    config.validate();
    DenseFactors f(config.kind, num_entities, num_relations, config.dim);
    const double bound = init_bound(config.dim);
    auto fill = [&](Matrix& m) {
        for (double& v : m.values()) v = uniform_real(rng, -bound, bound);
    };
    fill(f.subject());
    if (!f.tied()) fill(f.object());
    fill(f.relation());
    return f;
}

double triple_dot(std::span<const double> a, std::span<const double> b, std::span<const double> c) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) s += a[d] * b[d] * c[d];
    return s;
}

double score(const DenseFactors& f, EntityId i, EntityId j, RelationId k) {
    f.check_indices(i, j, k);
    return triple_dot(f.a(i), f.b(j), f.c(k));
}

double sigmoid(double theta) {
    if (theta >= 0.0) return 1.0 / (1.0 + std::exp(-theta));
    const double e = std::exp(theta);
    return e / (1.0 + e);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double logistic_loss(int x, double theta) {
    // -log sigma(t) = softplus(-t); -log(1 - sigma(t)) = softplus(t)
    return x ? softplus(-theta) : softplus(theta);
}

Gradients dense_gradients(const DenseFactors& f, EntityId i, EntityId j, RelationId k, int x,
                          const TrainConfig& config) {
    f.check_indices(i, j, k);
    const auto a = f.a(i);
    const auto b = f.b(j);
    const auto c = f.c(k);
    const std::size_t dim = f.dim();

    Gradients g;
    g.theta = triple_dot(a, b, c);
    g.loss = logistic_loss(x, g.theta);
    const double coef = sigmoid(g.theta) - static_cast<double>(x);
    g.a.resize(dim);
    g.b.resize(dim);
    g.c.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        g.a[d] = coef * b[d] * c[d] + 2.0 * config.lambda_a * a[d];
        g.b[d] = coef * a[d] * c[d] + 2.0 * config.lambda_b * b[d];
        g.c[d] = coef * a[d] * b[d] + 2.0 * config.lambda_c * c[d];
    }
    return g;
}

namespace {

void apply(std::span<double> row, const std::vector<double>& grad, double eta) {
    for (std::size_t d = 0; d < row.size(); ++d) row[d] -= eta * grad[d];
}

}  // namespace

double grad_step(DenseFactors& f, EntityId i, EntityId j, RelationId k, int x, const TrainConfig& config) {
    const Gradients g = dense_gradients(f, i, j, k, x, config);
    apply(f.a(i), g.a, config.eta);
    apply(f.b(j), g.b, config.eta);
    apply(f.c(k), g.c, config.eta);
    return g.loss;
}

std::vector<Triple> sample_negatives(const TripleStore& store, const Triple& positive, std::size_t n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    const std::uint64_t ne = store.num_entities();
    std::vector<Triple> out;
    out.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        Triple t = positive;
        for (int attempt = 0; attempt <= kMaxNegativeRetries; ++attempt) {
            t.object = static_cast<EntityId>(uniform_index(rng, ne));
            if (t != positive && !store.is_train_fact(t)) break;
        }
        out.push_back(t);
    }
    return out;
}

}  // namespace bcp
