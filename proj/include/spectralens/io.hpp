#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "spectralens/datamatrix.hpp"

namespace spectralens::io {

enum class CsvLayout { SamplesAsRows, SamplesAsColumns };

/// IDX container (MNIST family). Unsigned-byte rank-3 files become one column
/// per image with pixels scaled to [0, 1]; rank-1 files become a single
/// feature row and therefore fail the d >= 2 requirement.
DataMatrixD load_idx(const std::filesystem::path& path);

/// GRM1: "GRM1", u32 version (1), u64 d, u64 M, u8 flags, then d*M float64,
/// all little-endian, column-major.
DataMatrixD load_raw(const std::filesystem::path& path);
void save_raw(const DataMatrixD& x, const std::filesystem::path& path);
std::string encode_raw(const DataMatrixD& x);

DataMatrixD load_csv(const std::filesystem::path& path, CsvLayout layout, bool has_header = false);
DataMatrixD parse_csv(std::string_view text, CsvLayout layout, bool has_header = false,
                      std::string_view source = "csv");

/// Dispatch on extension: .grm1/.grm -> GRM1, .csv -> CSV (samples as rows),
/// anything else is sniffed for the GRM1 or IDX magic.
DataMatrixD load_any(const std::filesystem::path& path, CsvLayout csv_layout = CsvLayout::SamplesAsRows,
                     bool csv_header = false);

/// Write through a sibling temporary and rename into place, so readers never
/// observe a partially written file.
void write_atomically(const std::filesystem::path& path, std::string_view bytes);

}  // namespace spectralens::io
