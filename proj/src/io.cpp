#include "spectralens/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

namespace spectralens::io {
namespace {

constexpr char kGrmMagic[4] = {'G', 'R', 'M', '1'};
constexpr std::uint32_t kGrmVersion = 1;
constexpr std::size_t kGrmHeaderSize = 4 + 4 + 8 + 8 + 1;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const unsigned char* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

template <typename T>
T read_le(const char* p) {
    char buf[sizeof(T)];
    std::memcpy(buf, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(buf, buf + sizeof(T));
    }
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

template <typename T>
void append_le(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(buf, buf + sizeof(T));
    }
    out.append(buf, sizeof(T));
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

double parse_cell(std::string_view cell, std::size_t line, std::size_t column) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') {
        cell.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": not a number: '" + std::string(cell) + "'");
    }
    return value;
}

}  // namespace

DataMatrixD load_idx(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() < 4) {
        throw LengthError(path.string() + ": file shorter than the IDX magic");
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t magic = read_be32(p);
    std::size_t rank = 0;
    if (magic == 0x00000803) {
        rank = 3;
    } else if (magic == 0x00000801) {
        rank = 1;
    } else {
        std::ostringstream msg;
        msg << path.string() << ": unsupported IDX magic 0x" << std::hex << magic
            << " (expected unsigned-byte rank 3 or rank 1)";
        throw FormatError(msg.str());
    }
    const std::size_t header = 4 + 4 * rank;
    if (bytes.size() < header) {
        throw LengthError(path.string() + ": truncated IDX header");
    }
    std::vector<std::size_t> dims(rank);
    for (std::size_t k = 0; k < rank; ++k) {
        dims[k] = read_be32(p + 4 + 4 * k);
    }
    const std::size_t count = dims[0];
    const std::size_t features = rank == 3 ? dims[1] * dims[2] : 1;
    const std::size_t payload = count * features;
    if (bytes.size() - header < payload) {
        throw LengthError(path.string() + ": IDX payload has " + std::to_string(bytes.size() - header) +
                          " bytes, header declares " + std::to_string(payload));
    }
    Matrix<double> values(static_cast<Eigen::Index>(features), static_cast<Eigen::Index>(count));
    const unsigned char* pixels = p + header;
    for (std::size_t a = 0; a < count; ++a) {
        for (std::size_t i = 0; i < features; ++i) {
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) =
                static_cast<double>(pixels[a * features + i]) / 255.0;
        }
    }
    return DataMatrixD(std::move(values), {}, "idx:" + path.filename().string());
}

DataMatrixD load_raw(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() < kGrmHeaderSize) {
        throw LengthError(path.string() + ": file shorter than the GRM1 header");
    }
    if (std::memcmp(bytes.data(), kGrmMagic, 4) != 0) {
        throw FormatError(path.string() + ": missing GRM1 magic");
    }
    const auto version = read_le<std::uint32_t>(bytes.data() + 4);
    if (version != kGrmVersion) {
        throw FormatError(path.string() + ": unsupported GRM1 version " + std::to_string(version));
    }
    const auto d = read_le<std::uint64_t>(bytes.data() + 8);
    const auto m = read_le<std::uint64_t>(bytes.data() + 16);
    const auto flags = static_cast<std::uint8_t>(bytes[24]);
    if (d == 0 || m == 0) {
        throw DimensionError(path.string() + ": GRM1 header declares a zero dimension");
    }
    const std::size_t available = bytes.size() - kGrmHeaderSize;
    if (d > available / 8 / m || available < d * m * 8) {
        throw LengthError(path.string() + ": GRM1 payload has " + std::to_string(available) +
                          " bytes, header declares " + std::to_string(d) + "x" + std::to_string(m) + " doubles");
    }
    Matrix<double> values(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m));
    const char* payload = bytes.data() + kGrmHeaderSize;
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(values.data(), payload, d * m * 8);
    } else {
        for (std::size_t k = 0; k < d * m; ++k) {
            values.data()[k] = std::bit_cast<double>(read_le<std::uint64_t>(payload + 8 * k));
        }
    }
    const Preprocessing pre{(flags & 0x1) != 0, (flags & 0x2) != 0};
    return DataMatrixD(std::move(values), pre, "grm1:" + path.filename().string());
}

std::string encode_raw(const DataMatrixD& x) {
    std::string out;
    const auto n = static_cast<std::size_t>(x.d() * x.M());
    out.reserve(kGrmHeaderSize + 8 * n);
    out.append(kGrmMagic, 4);
    append_le<std::uint32_t>(out, kGrmVersion);
    append_le<std::uint64_t>(out, static_cast<std::uint64_t>(x.d()));
    append_le<std::uint64_t>(out, static_cast<std::uint64_t>(x.M()));
    std::uint8_t flags = 0;
    flags |= x.preprocessing().centered ? 0x1 : 0x0;
    flags |= x.preprocessing().standardized ? 0x2 : 0x0;
    out.push_back(static_cast<char>(flags));
    for (std::size_t k = 0; k < n; ++k) {
        append_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x.values().data()[k]));
    }
    return out;
}

void save_raw(const DataMatrixD& x, const std::filesystem::path& path) { write_atomically(path, encode_raw(x)); }

DataMatrixD parse_csv(std::string_view text, CsvLayout layout, bool has_header, std::string_view source) {
    std::vector<double> cells;
    std::size_t width = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    bool skip = has_header;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        if (skip) {
            skip = false;
            continue;
        }
        std::size_t fields = 0;
        while (true) {
            const auto comma = line.find(',');
            cells.push_back(parse_cell(line.substr(0, comma), line_no, fields + 1));
            ++fields;
            if (comma == std::string_view::npos) {
                break;
            }
            line.remove_prefix(comma + 1);
        }
        if (rows == 0) {
            width = fields;
        } else if (fields != width) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                             " fields, found " + std::to_string(fields));
        }
        ++rows;
    }
    if (rows == 0) {
        throw ParseError("CSV input contains no data rows");
    }
    // cells is row-major rows x width.
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> table(
        cells.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
    Matrix<double> values = layout == CsvLayout::SamplesAsColumns ? Matrix<double>(table)
                                                                   : Matrix<double>(table.transpose());
    return DataMatrixD(std::move(values), {}, std::string(source));
}

DataMatrixD load_csv(const std::filesystem::path& path, CsvLayout layout, bool has_header) {
    return parse_csv(read_file(path), layout, has_header, "csv:" + path.filename().string());
}

DataMatrixD load_any(const std::filesystem::path& path, CsvLayout csv_layout, bool csv_header) {
    const auto ext = path.extension().string();
    if (ext == ".csv") {
        return load_csv(path, csv_layout, csv_header);
    }
    if (ext == ".grm1" || ext == ".grm") {
        return load_raw(path);
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    char head[4] = {};
    in.read(head, 4);
    if (std::memcmp(head, kGrmMagic, 4) == 0) {
        return load_raw(path);
    }
    return load_idx(path);
}

void write_atomically(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot write " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            std::filesystem::remove(tmp);
            throw InputError("short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace spectralens::io
