#include "ttoi/io.hpp"

#include "ttoi/errors.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace ttoi {

namespace {

constexpr std::size_t kHeaderFixed = 16;

void put_le(std::vector<std::uint8_t>& out, std::uint64_t value, int bytes)
{
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

std::uint64_t get_le(const std::vector<std::uint8_t>& in, std::size_t offset, int bytes)
{
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
    return v;
}

[[noreturn]] void format_error(std::size_t offset, const std::string& what)
{
    throw FormatError("tensor file, byte " + std::to_string(offset) + ": " + what);
}

void require_length(const std::vector<std::uint8_t>& in, std::size_t expected, std::size_t offset,
                    const char* what)
{
    if (in.size() < expected) {
        format_error(offset, std::string("truncated ") + what + ": expected at least " + std::to_string(expected) +
                                 " bytes, got " + std::to_string(in.size()));
    }
}

std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const DenseTensor& t)
{
    if (t.order() > std::numeric_limits<std::uint32_t>::max()) throw ArgumentError("tensor order too large");
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderFixed + 8 * t.order() + 8 * t.size());
    out.insert(out.end(), std::begin(kTensorMagic), std::end(kTensorMagic));
    put_le(out, kTensorVersion, 4);
    put_le(out, t.order(), 4);
    for (std::size_t p : t.dims()) put_le(out, p, 8);
    for (double x : t.data()) put_le(out, std::bit_cast<std::uint64_t>(x), 8);
    return out;
}

DenseTensor decode_tensor(const std::vector<std::uint8_t>& in)
{
    require_length(in, 8, 0, "magic");
    if (std::memcmp(in.data(), kTensorMagic, 8) != 0) format_error(0, "bad magic, expected \"TTOITNSR\"");
    require_length(in, kHeaderFixed, 8, "header");
    const std::uint64_t version = get_le(in, 8, 4);
    if (version != kTensorVersion) format_error(8, "unsupported version " + std::to_string(version));
    const std::uint64_t order = get_le(in, 12, 4);
    if (order == 0) format_error(12, "order must be >= 1");
    if (order > (std::numeric_limits<std::size_t>::max() - kHeaderFixed) / 8) format_error(12, "order too large");
    const std::size_t header = kHeaderFixed + 8 * order;
    require_length(in, header, kHeaderFixed, "dimension list");

    Dims dims(order);
    for (std::size_t k = 0; k < order; ++k) {
        dims[k] = get_le(in, kHeaderFixed + 8 * k, 8);
        if (dims[k] == 0) format_error(kHeaderFixed + 8 * k, "dimension " + std::to_string(k + 1) + " is zero");
    }
    std::size_t count = 0;
    try {
        count = checked_product(dims);
    } catch (const Error&) {
        format_error(kHeaderFixed, "dimension product overflows");
    }
    if (count > (std::numeric_limits<std::size_t>::max() - header) / 8) {
        format_error(kHeaderFixed, "dimension product overflows");
    }
    const std::size_t expected = header + 8 * count;
    if (in.size() != expected) {
        format_error(header, "payload length mismatch: expected " + std::to_string(expected) + " bytes in total, got " +
                                 std::to_string(in.size()));
    }
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) data[i] = std::bit_cast<double>(get_le(in, header + 8 * i, 8));
    return DenseTensor(std::move(dims), std::move(data));
}

void write_tensor(const std::filesystem::path& path, const DenseTensor& t)
{
    const std::vector<std::uint8_t> bytes = encode_tensor(t);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

DenseTensor read_tensor(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read from '" + path.string() + "' failed");
    return decode_tensor(bytes);
}

Trajectory parse_trajectory(std::istream& in, std::size_t states)
{
    Trajectory traj;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t");
        const std::string token = line.substr(first, last - first + 1);
        std::size_t pos = 0;
        unsigned long long value = 0;
        bool ok = token.find_first_not_of("0123456789") == std::string::npos;
        if (ok) {
            try {
                value = std::stoull(token, &pos);
            } catch (const std::exception&) {
                ok = false;
            }
        }
        if (!ok || pos != token.size()) {
            throw FormatError("trajectory line " + std::to_string(line_no) + ": '" + token + "' is not a positive integer");
        }
        if (value < 1 || value > std::numeric_limits<std::uint32_t>::max() || (states && value > states)) {
            throw FormatError("trajectory line " + std::to_string(line_no) + ": state " + token + " outside [1, " +
                              (states ? std::to_string(states) : std::string("2^32-1")) + "]");
        }
        traj.states.push_back(static_cast<std::uint32_t>(value - 1));
    }
    if (in.bad()) throw IoError("error while reading trajectory");
    return traj;
}

Trajectory read_trajectory(const std::filesystem::path& path, std::size_t states)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return parse_trajectory(in, states);
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& trajectory)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    for (std::uint32_t s : trajectory.states) out << (static_cast<std::uint64_t>(s) + 1) << '\n';
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), columns_(header.size())
{
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells)
{
    if (cells.size() != columns_) {
        throw ArgumentError("csv row has " + std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(columns_));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << csv_escape(cells[i]);
    }
    out_ << '\n';
}

void write_records(std::ostream& out, const std::vector<ExperimentRecord>& records, bool include_wall_ms)
{
    std::vector<std::string> header = {"method"};
    if (!records.empty()) {
        for (const auto& [name, value] : records.front().cell) header.push_back(name);
    }
    header.insert(header.end(), {"replication", "error"});
    if (include_wall_ms) header.push_back("wall_ms");
    CsvWriter csv(out, header);
    for (const ExperimentRecord& r : records) {
        if (r.cell.size() + 1 + 2 + (include_wall_ms ? 1 : 0) != header.size()) {
            throw ArgumentError("write_records: records have different cell parameters");
        }
        for (std::size_t rep = 0; rep < r.errors.size(); ++rep) {
            std::vector<std::string> cells = {r.method};
            for (std::size_t c = 0; c < r.cell.size(); ++c) {
                if (r.cell[c].first != header[c + 1]) {
                    throw ArgumentError("write_records: records have different cell parameters");
                }
                cells.push_back(r.cell[c].second);
            }
            cells.push_back(std::to_string(rep));
            cells.push_back(format_double(r.errors[rep]));
            if (include_wall_ms) cells.push_back(format_double(r.wall_ms[rep]));
            csv.row(cells);
        }
    }
}

}  // namespace ttoi
