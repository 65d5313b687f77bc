#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace socsim {

// Number -> fixed 9-significant-digit scientific notation ("1.23456789e+00").
std::string format_sci(double v);

// Line-oriented CSV writer: UTF-8, LF endings, numbers via format_sci.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    void header(const std::string& names);
    void row(std::initializer_list<double> values);
    void row(const std::vector<double>& values);
    void flush() { out_.flush(); }

private:
    std::ofstream out_;
};

// FNV-1a 64-bit digest of a file's bytes, hex encoded; used for run manifests.
std::string file_checksum(const std::string& path);

} // namespace socsim
