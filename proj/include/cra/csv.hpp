#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "cra/errors.hpp"

namespace cra {

/// Shortest round-trip decimal representation of a double, stable across
/// runs (used everywhere results are serialised).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) {
        // try to shorten
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[40];
            std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
            std::sscanf(shorter, "%lf", &back);
            if (back == v) return shorter;
        }
    }
    return buf;
}

/// Minimal RFC-4180-style CSV writer: comma separated, header row, fields
/// quoted only when needed.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw Error("cannot open " + path + " for writing");
    }

    void row(const std::vector<std::string>& fields) {
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << quote(fields[i]);
        }
        out_ << '\n';
    }

  private:
    static std::string quote(const std::string& f) {
        if (f.find_first_of(",\"\n") == std::string::npos) return f;
        std::string q = "\"";
        for (char ch : f) {
            if (ch == '"') q += '"';
            q += ch;
        }
        q += '"';
        return q;
    }

    std::ofstream out_;
};

}  // namespace cra
