#include "socsim/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace socsim {

std::string format_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.8e", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
}

void CsvWriter::header(const std::string& names) { out_ << names << "\n"; }

void CsvWriter::row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) out_ << ',';
        out_ << format_sci(v);
        first = false;
    }
    out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
    bool first = true;
    for (double v : values) {
        if (!first) out_ << ',';
        out_ << format_sci(v);
        first = false;
    }
    out_ << "\n";
}

std::string file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for checksum: " + path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

} // namespace socsim
