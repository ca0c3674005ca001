#include "bcp/expressiveness.hpp"

#include <sstream>
#include <stdexcept>

namespace bcp {

std::array<bool, 4> block_bits(Block block) {
    switch (block) {
        case Block::P: return {true, true, false, false};
        case Block::Q: return {true, false, true, false};
        case Block::R: return {true, true, true, true};
        case Block::NegR: return {false, false, false, false};
    }
    throw std::invalid_argument("bad block");
}

std::array<double, 4> block_values(Block block, double delta) {
    const auto bits = block_bits(block);
    std::array<double, 4> out{};
    for (std::size_t t = 0; t < 4; ++t) out[t] = bits[t] ? delta : -delta;
    return out;
}

const char* block_name(Block block) {
    switch (block) {
        case Block::P: return "p";
        case Block::Q: return "q";
        case Block::R: return "r";
        case Block::NegR: return "-r";
    }
    return "?";
}

BoolTensor::BoolTensor(std::size_t num_entities, std::size_t num_relations)
    : ne_(num_entities), nr_(num_relations), cells_(num_entities * num_entities * num_relations, 0) {
    if (num_entities == 0 || num_relations == 0) throw std::invalid_argument("tensor dimensions must be positive");
}

std::size_t BoolTensor::index(std::size_t i, std::size_t j, std::size_t k) const {
    if (i >= ne_ || j >= ne_ || k >= nr_) throw std::out_of_range("tensor index out of range");
    return (i * ne_ + j) * nr_ + k;
}

BoolTensor BoolTensor::from_values(std::size_t num_entities, std::size_t num_relations,
                                   std::span<const int> values) {
    BoolTensor x(num_entities, num_relations);
    if (values.size() != x.cells_.size()) throw std::invalid_argument("tensor value count does not match shape");
    for (std::size_t n = 0; n < values.size(); ++n) {
        if (values[n] != 0 && values[n] != 1)
            throw std::invalid_argument("tensor entry " + std::to_string(n) + " is not boolean");
        x.cells_[n] = static_cast<std::uint8_t>(values[n]);
    }
    return x;
}

BoolTensor BoolTensor::from_mask(std::size_t num_entities, std::size_t num_relations, std::uint64_t mask) {
    BoolTensor x(num_entities, num_relations);
    if (x.cells_.size() > 64) throw std::invalid_argument("tensor too large for a 64-bit mask");
    for (std::size_t n = 0; n < x.cells_.size(); ++n) x.cells_[n] = (mask >> n) & 1u;
    return x;
}

BoolTensor BoolTensor::random(std::size_t num_entities, std::size_t num_relations, Rng& rng) {
    BoolTensor x(num_entities, num_relations);
    for (auto& cell : x.cells_) cell = static_cast<std::uint8_t>(rng() >> 63);
    return x;
}

EncoderLayout::EncoderLayout(std::size_t num_entities, std::size_t num_relations)
    : ne_(num_entities), nr_(num_relations) {
    if (num_entities == 0 || num_relations == 0) throw std::invalid_argument("layout dimensions must be positive");
}

Block EncoderLayout::a_block(std::size_t i, std::size_t gamma) const {
    // 1-based rule (gamma mod N_e) = (i mod N_e), shifted by one on both sides.
    return gamma % ne_ == i ? Block::P : Block::Q;
}

Block EncoderLayout::b_block(const BoolTensor& x, std::size_t j, std::size_t gamma) const {
    return x.at(iota(gamma), j, kappa(gamma)) ? Block::P : Block::R;
}

Block EncoderLayout::c_block(std::size_t k, std::size_t gamma) const {
    return first_halfpage(gamma) || kappa(gamma) == k ? Block::R : Block::NegR;
}

namespace {

void put_block(BitMatrix& m, std::size_t row, std::size_t gamma, Block block) {
    const auto bits = block_bits(block);
    for (std::size_t t = 0; t < kBlockBits; ++t) m.set(row, kBlockBits * gamma + t, bits[t]);
}

std::optional<Block> read_block(BitSpan row, std::size_t gamma) {
    std::array<bool, 4> bits{};
    for (std::size_t t = 0; t < kBlockBits; ++t) bits[t] = row.test(kBlockBits * gamma + t);
    for (Block b : {Block::P, Block::Q, Block::R, Block::NegR})
        if (block_bits(b) == bits) return b;
    return std::nullopt;
}

}  // namespace

BinaryFactors encode(const BoolTensor& x, double delta) {
    const EncoderLayout layout(x.num_entities(), x.num_relations());
    const std::size_t ne = x.num_entities();
    const std::size_t nr = x.num_relations();
    BinaryFactors f(ModelKind::BCP, ne, nr, layout.dim(), delta);
    for (std::size_t gamma = 0; gamma < layout.num_blocks(); ++gamma) {
        for (std::size_t i = 0; i < ne; ++i) put_block(f.subject(), i, gamma, layout.a_block(i, gamma));
        for (std::size_t j = 0; j < ne; ++j) put_block(f.object(), j, gamma, layout.b_block(x, j, gamma));
        for (std::size_t k = 0; k < nr; ++k) put_block(f.relation(), k, gamma, layout.c_block(k, gamma));
    }
    return f;
}

ReconstructionReport verify_reconstruction(const BinaryFactors& factors, const BoolTensor& x) {
    if (factors.num_entities() != x.num_entities() || factors.num_relations() != x.num_relations())
        throw std::invalid_argument("factor shape does not match tensor shape");
    ReconstructionReport report;
    if (factors.scale_product() != kExactDelta * kExactDelta * kExactDelta) {
        std::ostringstream msg;
        msg << "scale product " << factors.scale_product()
            << " != 1/8; scores are scaled by (2*delta)^3 and cannot equal 0/1 entries";
        report.warning = msg.str();
    }
    for (std::size_t i = 0; i < x.num_entities(); ++i) {
        for (std::size_t j = 0; j < x.num_entities(); ++j) {
            for (std::size_t k = 0; k < x.num_relations(); ++k) {
                const double theta = score_bitwise(factors, static_cast<EntityId>(i), static_cast<EntityId>(j),
                                                   static_cast<RelationId>(k));
                const int expected = x.at(i, j, k) ? 1 : 0;
                ++report.checked;
                if (theta != static_cast<double>(expected)) report.mismatches.push_back({i, j, k, expected, theta});
            }
        }
    }
    return report;
}

int block_term(BitSpan a, BitSpan b, BitSpan c, std::size_t gamma) {
    int sum = 0;
    for (std::size_t t = 0; t < kBlockBits; ++t) {
        const std::size_t d = kBlockBits * gamma + t;
        // product of three signs is + iff an even number of them are negative
        const int negatives = !a.test(d) + !b.test(d) + !c.test(d);
        sum += negatives % 2 == 0 ? 1 : -1;
    }
    return sum;
}

StructureReport check_block_structure(const BinaryFactors& factors, const EncoderLayout& layout) {
    StructureReport report;
    const std::size_t ne = layout.num_entities();
    const std::size_t nr = layout.num_relations();
    if (factors.num_entities() != ne || factors.num_relations() != nr || factors.dim() != layout.dim()) {
        report.violations.push_back("factor shape does not match the layout");
        return report;
    }

    auto expect = [&report](bool cond, auto&& describe) {
        ++report.checks;
        if (!cond) {
            std::ostringstream msg;
            describe(msg);
            report.violations.push_back(msg.str());
        }
    };
    auto block = [&](BitSpan row, std::size_t gamma) { return read_block(row, gamma); };

    // Every block is one of the four codes, per matrix alphabet.
    for (std::size_t gamma = 0; gamma < layout.num_blocks(); ++gamma) {
        for (std::size_t i = 0; i < ne; ++i) {
            auto a = block(factors.a(static_cast<EntityId>(i)), gamma);
            expect(a && (*a == Block::P || *a == Block::Q),
                   [&](std::ostream& o) { o << "A row " << i << " block " << gamma << " is not p or q"; });
            auto b = block(factors.b(static_cast<EntityId>(i)), gamma);
            expect(b && (*b == Block::P || *b == Block::R),
                   [&](std::ostream& o) { o << "B row " << i << " block " << gamma << " is not p or r"; });
        }
        for (std::size_t k = 0; k < nr; ++k) {
            auto c = block(factors.c(static_cast<RelationId>(k)), gamma);
            expect(c && (*c == Block::R || *c == Block::NegR),
                   [&](std::ostream& o) { o << "C row " << k << " block " << gamma << " is not r or -r"; });
        }
    }
    if (!report.ok()) return report;

    const std::size_t n_blocks = layout.num_blocks();
    for (std::size_t i = 0; i < ne; ++i) {
        const BitSpan a = factors.a(static_cast<EntityId>(i));
        // (a) a_{i,gamma} = a_{i,gamma+N_e}
        for (std::size_t gamma = 0; gamma + ne < n_blocks; ++gamma)
            expect(block(a, gamma) == block(a, gamma + ne),
                   [&](std::ostream& o) { o << "(a) A row " << i << " block " << gamma << " != block +N_e"; });
        for (std::size_t k = 0; k < nr; ++k) {
            // (b) a_{i,alpha(k,i)} = p
            expect(block(a, layout.alpha(k, i)) == Block::P,
                   [&](std::ostream& o) { o << "(b) A row " << i << " alpha(" << k << "," << i << ") != p"; });
            // (c) a_{i,alpha(k,m')} = q
            for (std::size_t m = 0; m < ne; ++m) {
                if (m == i) continue;
                expect(block(a, layout.alpha(k, m)) == Block::Q,
                       [&](std::ostream& o) { o << "(c) A row " << i << " alpha(" << k << "," << m << ") != q"; });
            }
        }
    }
    // (d) b_{j,alpha(k,m)} = b_{j,beta(k,m)}
    for (std::size_t j = 0; j < ne; ++j)
        for (std::size_t k = 0; k < nr; ++k)
            for (std::size_t m = 0; m < ne; ++m) {
                const BitSpan b = factors.b(static_cast<EntityId>(j));
                expect(block(b, layout.alpha(k, m)) == block(b, layout.beta(k, m)), [&](std::ostream& o) {
                    o << "(d) B row " << j << " halfpages differ at (" << k << "," << m << ")";
                });
            }
    for (std::size_t k = 0; k < nr; ++k) {
        const BitSpan c = factors.c(static_cast<RelationId>(k));
        for (std::size_t m = 0; m < ne; ++m) {
            // (e) own page is r on both halfpages
            expect(block(c, layout.alpha(k, m)) == Block::R && block(c, layout.beta(k, m)) == Block::R,
                   [&](std::ostream& o) { o << "(e) C row " << k << " own page block " << m << " != r"; });
            // (f) foreign pages flip sign across halfpages
            for (std::size_t n = 0; n < nr; ++n) {
                if (n == k) continue;
                const auto lo = block(c, layout.alpha(n, m));
                const auto hi = block(c, layout.beta(n, m));
                const bool flipped = (lo == Block::R && hi == Block::NegR) || (lo == Block::NegR && hi == Block::R);
                expect(flipped, [&](std::ostream& o) {
                    o << "(f) C row " << k << " page " << n << " block " << m << " not sign-flipped";
                });
            }
        }
    }

    // Zero sums and the score decomposition, in units of scale^3.
    for (std::size_t i = 0; i < ne; ++i) {
        for (std::size_t j = 0; j < ne; ++j) {
            for (std::size_t k = 0; k < nr; ++k) {
                const BitSpan a = factors.a(static_cast<EntityId>(i));
                const BitSpan b = factors.b(static_cast<EntityId>(j));
                const BitSpan c = factors.c(static_cast<RelationId>(k));
                const std::size_t own_alpha = layout.alpha(k, i);
                const std::size_t own_beta = layout.beta(k, i);
                const int t_alpha = block_term(a, b, c, own_alpha);
                const int t_beta = block_term(a, b, c, own_beta);
                expect(t_alpha == t_beta, [&](std::ostream& o) {
                    o << "alpha/beta terms differ for (" << i << "," << j << "," << k << ")";
                });
                for (std::size_t n = 0; n < nr; ++n) {
                    if (n == k) continue;
                    for (std::size_t m = 0; m < ne; ++m) {
                        const int pair = block_term(a, b, c, layout.alpha(n, m)) + block_term(a, b, c, layout.beta(n, m));
                        expect(pair == 0, [&](std::ostream& o) {
                            o << "pairwise sum " << pair << " != 0 for (" << i << "," << j << "," << k << ") page " << n
                              << " block " << m;
                        });
                    }
                }
                int remainder = 0;
                int total = 0;
                for (std::size_t gamma = 0; gamma < n_blocks; ++gamma) {
                    const int t = block_term(a, b, c, gamma);
                    total += t;
                    if (gamma != own_alpha && gamma != own_beta) remainder += t;
                }
                expect(remainder == 0, [&](std::ostream& o) {
                    o << "remainder sum " << remainder << " != 0 for (" << i << "," << j << "," << k << ")";
                });
                expect(total == 2 * t_alpha, [&](std::ostream& o) {
                    o << "score " << total << " != 2 * alpha term " << t_alpha << " for (" << i << "," << j << ","
                      << k << ")";
                });
            }
        }
    }
    return report;
}

}  // namespace bcp
