#pragma once

// File formats.
//
// Tensor file (all integers and floats little-endian):
//   offset 0   8 bytes  magic "TTOITNSR"
//   offset 8   u32      version, currently 1
//   offset 12  u32      order d >= 1
//   offset 16  d x u64  dimensions p_1 ... p_d, each >= 1
//   then       f64      p_1 * ... * p_d entries, mode 1 fastest
//
// Trajectory file: UTF-8 text, one state per line as a 1-based integer,
// blank lines ignored. In memory states are 0-based.
//
// CSV: comma separated, one header row, LF line endings, floating-point
// values printed with 17 significant digits.

#include "ttoi/markov.hpp"
#include "ttoi/simlab.hpp"
#include "ttoi/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ttoi {

inline constexpr char kTensorMagic[8] = {'T', 'T', 'O', 'I', 'T', 'N', 'S', 'R'};
inline constexpr std::uint32_t kTensorVersion = 1;

std::vector<std::uint8_t> encode_tensor(const DenseTensor& t);
/// Throws FormatError naming the byte offset of the first problem.
DenseTensor decode_tensor(const std::vector<std::uint8_t>& bytes);

void write_tensor(const std::filesystem::path& path, const DenseTensor& t);
DenseTensor read_tensor(const std::filesystem::path& path);

/// Parses 1-based states; `states` = 0 skips the upper bound check.
Trajectory parse_trajectory(std::istream& in, std::size_t states = 0);
Trajectory read_trajectory(const std::filesystem::path& path, std::size_t states = 0);
void write_trajectory(const std::filesystem::path& path, const Trajectory& trajectory);

/// "%.17g"
std::string format_double(double x);

class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header);
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& out_;
    std::size_t columns_;
};

/// One row per replication: method, <cell parameters>, replication, error,
/// wall_ms. Failed replications print "nan" as the error. All records must
/// share the same cell parameter names.
void write_records(std::ostream& out, const std::vector<ExperimentRecord>& records, bool include_wall_ms = true);

}  // namespace ttoi
