#pragma once

#include <filesystem>
#include <string>

#include "satfp/signal_model.hpp"

namespace satfp {

// Burst interchange files.
//
// JSON form: {"satellite_id", "N", "snr_db", "modulation", "truth"?, "known_symbols"?,
//             "samples": [[re, im], ...]}
// Binary form: uint32 little-endian header length L, L bytes of the same JSON header
//              without "samples", then N little-endian float64 (re, im) pairs.
// snr_db is written as null when noise is disabled.

std::string burst_to_json(const Burst& b);
Burst burst_from_json(const std::string& text);

std::string burst_to_binary(const Burst& b);
Burst burst_from_binary(const std::string& bytes);

void write_burst_file(const std::filesystem::path& path, const Burst& b);
/// Chooses the binary reader when the extension is ".bin".
Burst read_burst_file(const std::filesystem::path& path);

}  // namespace satfp
