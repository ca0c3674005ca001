#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "bcp/model_io.hpp"
#include "bcp/vq.hpp"
#include "oracles.hpp"

using namespace bcp;

namespace {

DenseFactors random_dense(ModelKind kind, std::size_t ne, std::size_t nr, std::size_t dim, std::uint64_t seed) {
    TrainConfig c;
    c.kind = kind;
    c.dim = dim;
    Rng rng(seed);
    return init_factors(c, ne, nr, rng);
}

std::string bytes_of_dense(const DenseFactors& f) {
    std::ostringstream out(std::ios::binary);
    write_dense(out, f);
    return out.str();
}

std::string bytes_of_binary(const BinaryFactors& f) {
    std::ostringstream out(std::ios::binary);
    write_binary(out, f);
    return out.str();
}

}  // namespace

TEST(ModelIo, DenseRoundTripEveryKind) {
    for (auto kind : {ModelKind::CP, ModelKind::DistMult, ModelKind::BCP, ModelKind::BDistMult}) {
        const DenseFactors f = random_dense(kind, 5, 3, 7, 1);
        const std::string bytes = bytes_of_dense(f);
        EXPECT_EQ(bytes.size(), dense_file_size(kind, 5, 3, 7));
        std::istringstream in(bytes);
        EXPECT_EQ(read_dense(in), f);
    }
}

TEST(ModelIo, DenseHeaderLayout) {
    const std::string b = bytes_of_dense(random_dense(ModelKind::DistMult, 2, 1, 3, 1));
    EXPECT_EQ(b.substr(0, 4), "BCPD");
    EXPECT_EQ(b[4], 1);
    EXPECT_EQ(b[8], 1);   // kind byte
    EXPECT_EQ(b[9], 2);   // N_e, little-endian
    EXPECT_EQ(b[17], 1);  // N_r
    EXPECT_EQ(b[25], 3);  // D
    EXPECT_EQ(b.size(), kDenseHeaderBytes + 8 * 3 * (2 + 1));
}

TEST(ModelIo, BinaryRoundTripWithGarbageTail) {
    Rng rng(2);
    for (auto kind : {ModelKind::BCP, ModelKind::BDistMult}) {
        for (std::size_t dim : {1u, 64u, 65u, 130u}) {
            const BinaryFactors f = freeze(random_dense(kind, 4, 2, dim, dim), 0.3);
            std::string bytes = bytes_of_binary(f);
            EXPECT_EQ(bytes.size(), binary_file_size(kind, false, 4, 2, dim));
            std::istringstream in(bytes);
            EXPECT_EQ(read_binary(in), f);
        }
    }
    // set every bit past D in the first row's last word
    const BinaryFactors f = freeze(random_dense(ModelKind::BCP, 1, 1, 5, 3), 0.5);
    std::string bytes = bytes_of_binary(f);
    bytes[kDenseHeaderBytes + 8] |= static_cast<char>(0xE0);
    for (int b = 1; b < 8; ++b) bytes[kDenseHeaderBytes + 8 + b] = static_cast<char>(0xFF);
    std::istringstream in(bytes);
    EXPECT_EQ(read_binary(in), f);
}

TEST(ModelIo, VqScalesPersist) {
    const BinaryFactors q = vq_apply(random_dense(ModelKind::CP, 3, 2, 10, 4));
    const std::string bytes = bytes_of_binary(q);
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), kVqFlag | 2u);
    EXPECT_EQ(bytes.size(), binary_file_size(ModelKind::BCP, true, 3, 2, 10));
    std::istringstream in(bytes);
    const BinaryFactors back = read_binary(in);
    EXPECT_TRUE(back.vq());
    EXPECT_EQ(back.scales(), q.scales());
    EXPECT_EQ(back, q);
}

TEST(ModelIo, RejectsCorruptFiles) {
    const std::string good = bytes_of_dense(random_dense(ModelKind::CP, 2, 1, 3, 1));
    auto fails = [](std::string bytes) {
        std::istringstream in(bytes);
        EXPECT_THROW(read_dense(in), FormatError);
    };
    fails(good.substr(0, good.size() - 1));
    fails("XXXX" + good.substr(4));
    std::string version = good;
    version[4] = 9;
    fails(version);
    std::string kind = good;
    kind[8] = 7;
    fails(kind);

    std::istringstream in(good);
    EXPECT_THROW(read_binary(in), FormatError);
}

TEST(ModelIo, LoadModelDispatchesOnMagic) {
    const auto dir = std::filesystem::temp_directory_path();
    const DenseFactors d = random_dense(ModelKind::CP, 3, 2, 8, 1);
    save_dense(dir / "bcp_io.bcpd", d);
    save_binary(dir / "bcp_io.bcpb", freeze(d, 0.5));
    EXPECT_TRUE(std::holds_alternative<DenseFactors>(load_model(dir / "bcp_io.bcpd")));
    EXPECT_TRUE(std::holds_alternative<BinaryFactors>(load_model(dir / "bcp_io.bcpb")));
    EXPECT_THROW(load_model(dir / "does_not_exist.bcpb"), std::runtime_error);
}

TEST(ModelIo, BinaryIsAtLeastThirtyTimesSmaller) {
    for (std::size_t dim : {64u, 100u, 200u, 400u, 1000u}) {
        const std::size_t dense_body = dense_file_size(ModelKind::CP, 14, 110, dim) - kDenseHeaderBytes;
        const std::size_t bin_body = binary_file_size(ModelKind::BCP, false, 14, 110, dim) - kDenseHeaderBytes - 8;
        EXPECT_LE(30 * bin_body, dense_body) << "D=" << dim;
    }
}
