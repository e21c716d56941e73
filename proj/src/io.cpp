#include "kmlsvd/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace kmlsvd {

namespace {

constexpr char kMagic[4] = {'T', 'N', 'S', '1'};

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        return __builtin_bswap64(v);
    }
}

void write_u64(std::ostream& out, std::uint64_t v) {
    const std::uint64_t le = to_little_endian(v);
    out.write(reinterpret_cast<const char*>(&le), sizeof(le));
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw FormatError("tensor file: truncated header");
    return to_little_endian(v);
}

DenseTensor read_tensor_binary(std::istream& in) {
    const std::uint64_t order = read_u64(in);
    if (order == 0 || order > 64) {
        throw FormatError("tensor file: implausible order " + std::to_string(order));
    }
    std::vector<std::size_t> shape(order);
    std::size_t expected = 1;
    for (std::uint64_t d = 0; d < order; ++d) {
        shape[d] = read_u64(in);
        if (shape[d] == 0) throw FormatError("tensor file: zero extent in header");
        expected *= shape[d];
    }
    std::vector<double> values(expected);
    static_assert(sizeof(double) == 8);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(expected * sizeof(double)));
    const std::size_t got = static_cast<std::size_t>(in.gcount()) / sizeof(double);
    if (got != expected) {
        throw LengthError("tensor file: expected " + std::to_string(expected) +
                          " values, found " + std::to_string(got));
    }
    if constexpr (std::endian::native != std::endian::little) {
        for (double& v : values) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            bits = __builtin_bswap64(bits);
            std::memcpy(&v, &bits, 8);
        }
    }
    char extra;
    if (in.read(&extra, 1)) {
        throw LengthError("tensor file: trailing bytes after " + std::to_string(expected) +
                          " values");
    }
    return DenseTensor(std::move(shape), std::move(values));
}

DenseTensor read_tensor_text(std::istream& in) {
    std::string tag;
    in >> tag;
    if (tag != "tns") throw FormatError("tensor file: expected `tns` header, got `" + tag + "`");
    std::size_t order = 0;
    if (!(in >> order) || order == 0) throw FormatError("tensor file: bad order field");
    std::vector<std::size_t> shape(order);
    std::size_t expected = 1;
    for (std::size_t d = 0; d < order; ++d) {
        if (!(in >> shape[d]) || shape[d] == 0) {
            throw FormatError("tensor file: bad extent for mode " + std::to_string(d));
        }
        expected *= shape[d];
    }
    std::vector<double> values;
    values.reserve(expected);
    double v;
    while (in >> v) values.push_back(v);
    if (values.size() != expected) {
        throw LengthError("tensor file: expected " + std::to_string(expected) +
                          " values, found " + std::to_string(values.size()));
    }
    return DenseTensor(std::move(shape), std::move(values));
}

}  // namespace

DenseTensor read_tensor(std::istream& in) {
    char magic[4] = {};
    in.read(magic, 4);
    const std::streamsize got = in.gcount();
    if (got == 4 && std::memcmp(magic, kMagic, 4) == 0) {
        return read_tensor_binary(in);
    }
    in.clear();
    in.seekg(0);
    return read_tensor_text(in);
}

DenseTensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open tensor file " + path.string());
    return read_tensor(in);
}

void write_tensor(const DenseTensor& t, std::ostream& out, TensorFormat format) {
    if (format == TensorFormat::binary) {
        out.write(kMagic, 4);
        write_u64(out, t.order());
        for (std::size_t ext : t.shape()) write_u64(out, ext);
        if constexpr (std::endian::native == std::endian::little) {
            out.write(reinterpret_cast<const char*>(t.data()),
                      static_cast<std::streamsize>(t.size() * sizeof(double)));
        } else {
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double v = t[i];
                std::uint64_t bits;
                std::memcpy(&bits, &v, 8);
                bits = __builtin_bswap64(bits);
                out.write(reinterpret_cast<const char*>(&bits), 8);
            }
        }
        return;
    }
    out << "tns " << t.order();
    for (std::size_t ext : t.shape()) out << ' ' << ext;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", t[i]);
        out << buf << ((i + 1) % 8 == 0 ? '\n' : ' ');
    }
    if (t.size() % 8 != 0) out << '\n';
}

void write_tensor(const DenseTensor& t, const std::filesystem::path& path, TensorFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    write_tensor(t, out, format);
    if (!out) throw FormatError("write to " + path.string() + " failed");
}

DenseMatrix read_matrix(const std::filesystem::path& path) {
    const DenseTensor t = read_tensor(path);
    if (t.order() != 2) {
        throw FormatError("expected an order-2 tensor in " + path.string() + ", got order " +
                          std::to_string(t.order()));
    }
    return DenseMatrix(t.extent(0), t.extent(1), vectorize(t));
}

void write_matrix(const DenseMatrix& m, const std::filesystem::path& path, TensorFormat format) {
    write_tensor(DenseTensor({m.rows(), m.cols()}, {m.data(), m.data() + m.size()}), path,
                 format);
}

namespace {

std::string join_sizes(std::span<const std::size_t> values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) s += ',';
        s += std::to_string(values[i]);
    }
    return s;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(static_cast<std::size_t>(std::stoull(item)));
    }
    return out;
}

}  // namespace

void write_factors(const MlsvdFactors& f, const std::filesystem::path& dir,
                   const std::vector<std::pair<std::string, std::string>>& extra,
                   TensorFormat format) {
    std::filesystem::create_directories(dir);
    std::vector<std::size_t> shape(f.factors.size());
    std::vector<std::size_t> ranks(f.factors.size());
    for (std::size_t d = 0; d < f.factors.size(); ++d) {
        shape[d] = f.factors[d].rows();
        ranks[d] = f.factors[d].cols();
        write_matrix(f.factors[d], dir / ("U" + std::to_string(d + 1) + ".tns"), format);
    }
    write_tensor(f.core, dir / "S.tns", format);

    std::ofstream meta(dir / "meta.txt");
    if (!meta) throw FormatError("cannot write manifest in " + dir.string());
    meta << "order=" << f.factors.size() << '\n';
    meta << "shape=" << join_sizes(shape) << '\n';
    meta << "ranks=" << join_sizes(ranks) << '\n';
    for (const auto& [key, value] : extra) meta << key << '=' << value << '\n';
}

std::map<std::string, std::string> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open manifest " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError("manifest line without `=`: " + line);
        }
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

MlsvdFactors read_factors(const std::filesystem::path& dir) {
    const auto manifest = read_manifest(dir / "meta.txt");
    const auto need = [&](const char* key) -> const std::string& {
        const auto it = manifest.find(key);
        if (it == manifest.end()) {
            throw FormatError("manifest is missing key `" + std::string(key) + "`");
        }
        return it->second;
    };
    const std::size_t order = static_cast<std::size_t>(std::stoull(need("order")));
    const std::vector<std::size_t> shape = parse_sizes(need("shape"));
    const std::vector<std::size_t> ranks = parse_sizes(need("ranks"));
    if (shape.size() != order || ranks.size() != order) {
        throw FormatError("manifest order/shape/ranks disagree");
    }

    MlsvdFactors f;
    f.factors.resize(order);
    for (std::size_t d = 0; d < order; ++d) {
        f.factors[d] = read_matrix(dir / ("U" + std::to_string(d + 1) + ".tns"));
        if (f.factors[d].rows() != shape[d] || f.factors[d].cols() != ranks[d]) {
            throw FormatError("factor U" + std::to_string(d + 1) +
                              " disagrees with the manifest shape/ranks");
        }
    }
    f.core = read_tensor(dir / "S.tns");
    if (f.core.order() != order) throw FormatError("core order disagrees with the manifest");
    for (std::size_t d = 0; d < order; ++d) {
        if (f.core.extent(d) != ranks[d]) {
            throw FormatError("core extents disagree with the manifest ranks");
        }
    }
    return f;
}

}  // namespace kmlsvd
