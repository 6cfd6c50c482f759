#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lobsig/lob_record.hpp"

namespace lobsig {

/// Header for the flat LOB CSV schema:
/// ts,open,high,low,close,volume, then bid_px_i,bid_sz_i for i=1..L,
/// then ask_px_i,ask_sz_i for i=1..L.
std::string lob_csv_header(int levels);

/// Parses and validates a LOB CSV file. Throws ParseError (with line
/// number) on malformed rows and ValidationError naming the violated
/// invariant on bad data. Timestamps must be strictly increasing.
std::vector<LobRecord> parse_csv(const std::filesystem::path& path, int levels);

/// Writes records in the schema above. parse_csv(write_csv(x)) == x.
void write_csv(const std::filesystem::path& path, const std::vector<LobRecord>& records);

/// In-memory serialization (same bytes write_csv produces).
std::string serialize_csv(const std::vector<LobRecord>& records);

}  // namespace lobsig
