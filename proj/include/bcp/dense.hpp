#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bcp/kg.hpp"
#include "bcp/random.hpp"

namespace bcp {

enum class ModelKind : std::uint8_t { CP = 0, DistMult = 1, BCP = 2, BDistMult = 3 };

constexpr bool is_binarized(ModelKind k) { return k == ModelKind::BCP || k == ModelKind::BDistMult; }
constexpr bool is_tied(ModelKind k) { return k == ModelKind::DistMult || k == ModelKind::BDistMult; }

std::string to_string(ModelKind kind);
// Accepts cp, distmult, bcp, bdistmult (case-insensitive, '-' ignored).
ModelKind parse_model_kind(std::string_view name);

// Row-major dense matrix.
class Matrix {
   public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

   private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Factor matrices A (subjects), B (objects), C (relations). For tied kinds
// B has no storage of its own: object() and b() resolve to A.
class DenseFactors {
   public:
    DenseFactors() = default;
    DenseFactors(ModelKind kind, std::size_t num_entities, std::size_t num_relations, std::size_t dim);

    ModelKind kind() const { return kind_; }
    bool tied() const { return is_tied(kind_); }
    std::size_t dim() const { return dim_; }
    std::size_t num_entities() const { return subject_.rows(); }
    std::size_t num_relations() const { return relation_.rows(); }

    Matrix& subject() { return subject_; }
    const Matrix& subject() const { return subject_; }
    Matrix& object() { return tied() ? subject_ : object_; }
    const Matrix& object() const { return tied() ? subject_ : object_; }
    Matrix& relation() { return relation_; }
    const Matrix& relation() const { return relation_; }

    std::span<double> a(EntityId i) { return subject_.row(i); }
    std::span<const double> a(EntityId i) const { return subject_.row(i); }
    std::span<double> b(EntityId j) { return object().row(j); }
    std::span<const double> b(EntityId j) const { return object().row(j); }
    std::span<double> c(RelationId k) { return relation_.row(k); }
    std::span<const double> c(RelationId k) const { return relation_.row(k); }

    void check_indices(EntityId i, EntityId j, RelationId k) const;
    bool all_finite() const;

    friend bool operator==(const DenseFactors&, const DenseFactors&) = default;

   private:
    ModelKind kind_ = ModelKind::CP;
    std::size_t dim_ = 0;
    Matrix subject_;
    Matrix object_;
    Matrix relation_;
};

inline constexpr std::size_t kMaxEpochs = 1000;

struct TrainConfig {
    ModelKind kind = ModelKind::CP;
    double eta = 0.05;
    double lambda_a = 0.0;
    double lambda_b = 0.0;
    double lambda_c = 0.0;
    std::size_t dim = 200;
    double delta = 0.5;
    std::size_t epochs = 1000;
    std::size_t neg_per_pos = 5;
    std::uint64_t seed = 1;

    // Throws std::invalid_argument on an invalid combination.
    void validate() const;
};

// Entries i.i.d. U[-sqrt(6)/sqrt(2D), +sqrt(6)/sqrt(2D)].
double init_bound(std::size_t dim);
DenseFactors init_factors(const TrainConfig& config, std::size_t num_entities, std::size_t num_relations,
                          Rng& rng);

// theta_ijk = sum_d a_id * b_jd * c_kd. Throws std::out_of_range.
double score(const DenseFactors& f, EntityId i, EntityId j, RelationId k);

double triple_dot(std::span<const double> a, std::span<const double> b, std::span<const double> c);

double sigmoid(double theta);
// log(1 + exp(z)) without overflow.
double softplus(double z);
// -x log sigma(theta) + (x - 1) log(1 - sigma(theta)) for x in {0, 1}.
double logistic_loss(int x, double theta);

struct Gradients {
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> c;
    double theta = 0.0;
    double loss = 0.0;  // logistic term only
};

// dE_ijk/d{a_i, b_j, c_k} at the current parameters.
Gradients dense_gradients(const DenseFactors& f, EntityId i, EntityId j, RelationId k, int x,
                          const TrainConfig& config);

// Applies one SGD step with all three gradients taken from the pre-step
// values. Returns the logistic loss before the update.
double grad_step(DenseFactors& f, EntityId i, EntityId j, RelationId k, int x, const TrainConfig& config);

inline constexpr int kMaxNegativeRetries = 100;

// Object-side corruptions (i, j', k) with j' uniform; a draw hitting a known
// training fact is redrawn up to kMaxNegativeRetries times.
std::vector<Triple> sample_negatives(const TripleStore& store, const Triple& positive, std::size_t n, Rng& rng);

}  // namespace bcp
