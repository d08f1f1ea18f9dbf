#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace clustval::csv {

struct Record {
    std::vector<std::string> fields;
    std::size_t line = 0;  // line on which the record starts
};

/// RFC-4180 reader: quoted fields may contain commas, quotes ("") and newlines.
std::vector<Record> parse(std::string_view text);
std::vector<Record> read_file(const std::filesystem::path& path);

std::string quote(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace clustval::csv
