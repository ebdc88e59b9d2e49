#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace capadvisor {

/// Shortest round-trip decimal form (std::to_chars), locale-independent.
std::string format_double(double value);
std::string format_int(std::int64_t value);

/// Strict numeric parsing; `what` names the field in the error message.
double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);

/// Splits one CSV line on commas. No quoting; fields are returned verbatim.
std::vector<std::string_view> split_csv(std::string_view line);

std::uint64_t splitmix64(std::uint64_t state);
/// Stable per-(cap, run) seed derivation from a user seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

/// Worker count honoring CAPADVISOR_THREADS (0 or unset = hardware default).
unsigned thread_budget();
/// Runs body(0..count-1) on up to thread_budget() workers. Exceptions from
/// workers are rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Write-temp-then-rename so readers never observe partial files.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace capadvisor
