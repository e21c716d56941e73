#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kmlsvd/mlsvd.hpp"
#include "kmlsvd/tensor.hpp"

namespace kmlsvd {

/// Tensor file formats. Text: header line `tns <D> <N1> ... <ND>` followed
/// by whitespace-separated values in column-major order, 17 significant
/// digits so doubles round-trip exactly. Binary: magic `TNS1`, order and
/// extents as little-endian uint64, values as little-endian IEEE-754
/// doubles, column-major. The reader auto-detects the format by magic.
enum class TensorFormat { text, binary };

DenseTensor read_tensor(std::istream& in);
DenseTensor read_tensor(const std::filesystem::path& path);
void write_tensor(const DenseTensor& t, std::ostream& out, TensorFormat format);
void write_tensor(const DenseTensor& t, const std::filesystem::path& path,
                  TensorFormat format = TensorFormat::text);

/// Matrices travel as order-2 tensor files.
DenseMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const DenseMatrix& m, const std::filesystem::path& path,
                  TensorFormat format = TensorFormat::text);

/// Writes U1.tns ... UD.tns, S.tns and a key=value manifest (meta.txt) with
/// order, shape and ranks; extra entries (residuals and the like) are
/// appended as given.
void write_factors(const MlsvdFactors& f, const std::filesystem::path& dir,
                   const std::vector<std::pair<std::string, std::string>>& extra = {},
                   TensorFormat format = TensorFormat::text);

/// Reads a factor directory back; throws FormatError when the manifest and
/// the tensor files disagree on order, shape or ranks.
MlsvdFactors read_factors(const std::filesystem::path& dir);

std::map<std::string, std::string> read_manifest(const std::filesystem::path& path);

}  // namespace kmlsvd
