#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kmlsvd/io.hpp"
#include "kmlsvd/mlsvd.hpp"
#include "oracles.hpp"

using namespace kmlsvd;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "kmlsvd_io_test";
    fs::create_directories(dir);
    return dir;
}

bool bit_identical(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) return false;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("text header example parses to the column-major matrix") {
    std::istringstream in("tns 2 2 2\n1 2 3 4\n");
    const DenseTensor t = read_tensor(in);
    REQUIRE(t.shape() == std::vector<std::size_t>{2, 2});
    CHECK(t.at({0, 0}) == 1.0);
    CHECK(t.at({1, 0}) == 2.0);
    CHECK(t.at({0, 1}) == 3.0);
    CHECK(t.at({1, 1}) == 4.0);
}

TEST_CASE("both formats round-trip bit-exactly") {
    Lcg64 rng(111);
    DenseTensor t = oracles::random_tensor({3, 4, 2}, rng);
    t[0] = 1.0 / 3.0;
    t[1] = -1.2345678912345678e-300;
    t[2] = 9.87654321987654321e250;
    t[3] = 5e-324;  // subnormal
    t[4] = -0.0;

    const fs::path dir = temp_dir();
    for (TensorFormat format : {TensorFormat::text, TensorFormat::binary}) {
        const fs::path path = dir / (format == TensorFormat::text ? "t.tns" : "t.bin.tns");
        write_tensor(t, path, format);
        const DenseTensor back = read_tensor(path);
        CHECK(bit_identical(t, back));
    }
}

TEST_CASE("truncated and oversized payloads raise LengthError with counts") {
    std::istringstream trunc("tns 2 2 2\n1 2 3\n");
    CHECK_THROWS_WITH_AS(read_tensor(trunc), doctest::Contains("expected 4"), LengthError);

    std::istringstream extra("tns 2 2 2\n1 2 3 4 5\n");
    CHECK_THROWS_AS(read_tensor(extra), LengthError);

    // Binary payload cut short.
    const fs::path path = temp_dir() / "short.tns";
    {
        DenseTensor t = DenseTensor::zeros({2, 2});
        t[0] = 1.0;
        std::ofstream out(path, std::ios::binary);
        write_tensor(t, out, TensorFormat::binary);
    }
    fs::resize_file(path, fs::file_size(path) - 8);
    CHECK_THROWS_AS(read_tensor(path), LengthError);
}

TEST_CASE("bad headers raise FormatError") {
    std::istringstream bad_tag("mat 2 2 2\n1 2 3 4\n");
    CHECK_THROWS_AS(read_tensor(bad_tag), FormatError);

    std::istringstream no_order("tns\n");
    CHECK_THROWS_AS(read_tensor(no_order), FormatError);

    std::istringstream zero_extent("tns 2 2 0\n");
    CHECK_THROWS_AS(read_tensor(zero_extent), FormatError);

    // Valid magic, truncated binary header.
    const fs::path path = temp_dir() / "badheader.tns";
    {
        std::ofstream out(path, std::ios::binary);
        out.write("TNS1\x03\x00", 6);
    }
    CHECK_THROWS_AS(read_tensor(path), FormatError);

    CHECK_THROWS_AS(read_tensor(fs::path("/nonexistent/x.tns")), FormatError);
}

TEST_CASE("non-finite payloads are rejected") {
    const fs::path path = temp_dir() / "inf.tns";
    {
        DenseTensor t = DenseTensor::zeros({2});
        std::ofstream out(path, std::ios::binary);
        write_tensor(t, out, TensorFormat::binary);
    }
    // Patch the first payload value to +inf (little-endian 0x7FF0...0).
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(4 + 8 + 8);
        const unsigned char inf_bytes[8] = {0, 0, 0, 0, 0, 0, 0xF0, 0x7F};
        f.write(reinterpret_cast<const char*>(inf_bytes), 8);
    }
    CHECK_THROWS_AS(read_tensor(path), ValueError);
}

TEST_CASE("factor directories round-trip and validate their manifest") {
    Lcg64 rng(112);
    const DenseTensor t = oracles::random_tensor({4, 3, 5}, rng);
    const MlsvdFactors f = mlsvd(t, RankSpec::energy(1e-10));

    const fs::path dir = temp_dir() / "factors";
    fs::remove_all(dir);
    write_factors(f, dir, {{"residual.reconstruction", "1.23e-12"}});

    const auto manifest = read_manifest(dir / "meta.txt");
    CHECK(manifest.at("order") == "3");
    CHECK(manifest.at("shape") == "4,3,5");
    CHECK(manifest.at("residual.reconstruction") == "1.23e-12");

    const MlsvdFactors back = read_factors(dir);
    REQUIRE(back.factors.size() == 3);
    for (std::size_t d = 0; d < 3; ++d) {
        CHECK(oracles::max_abs_diff(back.factors[d], f.factors[d]) == 0.0);
    }
    CHECK(bit_identical(back.core, f.core));
    CHECK(bit_identical(reconstruct(back), reconstruct(f)));
}

TEST_CASE("factor directory errors") {
    Lcg64 rng(113);
    const DenseTensor t = oracles::random_tensor({3, 3, 3}, rng);
    const MlsvdFactors f = mlsvd(t);

    const fs::path dir = temp_dir() / "factors_bad";
    fs::remove_all(dir);
    write_factors(f, dir);

    // Tamper with the manifest ranks.
    {
        const auto manifest = read_manifest(dir / "meta.txt");
        std::ofstream meta(dir / "meta.txt");
        meta << "order=" << manifest.at("order") << "\n";
        meta << "shape=" << manifest.at("shape") << "\n";
        meta << "ranks=2,3,3\n";
    }
    CHECK_THROWS_AS(read_factors(dir), FormatError);

    fs::remove(dir / "U2.tns");
    CHECK_THROWS_AS(read_factors(dir), FormatError);
    fs::remove(dir / "meta.txt");
    CHECK_THROWS_AS(read_factors(dir), FormatError);
}

TEST_CASE("matrices are stored as order-2 tensors") {
    Lcg64 rng(114);
    const DenseMatrix m = oracles::random_matrix(3, 5, rng);
    const fs::path path = temp_dir() / "m.tns";
    write_matrix(m, path, TensorFormat::binary);
    const DenseMatrix back = read_matrix(path);
    CHECK(oracles::max_abs_diff(m, back) == 0.0);

    write_tensor(DenseTensor::zeros({2, 2, 2}), path);
    CHECK_THROWS_AS(read_matrix(path), FormatError);
}
