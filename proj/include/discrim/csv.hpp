#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "discrim/types.hpp"

namespace discrim::csv {

// RFC 4180 reader: comma separator, optional "..." quoting with "" escapes,
// LF or CRLF record ends. Returns raw string cells; numeric interpretation
// happens at the dataset layer.
class Reader {
public:
    explicit Reader(std::string content) : content_(std::move(content)) {
        // strip UTF-8 BOM
        if (content_.size() >= 3 && content_.compare(0, 3, "\xEF\xBB\xBF") == 0)
            pos_ = 3;
    }

    static Reader from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return Reader(std::move(buf).str());
    }

    // Reads the next record into `row`; false at end of input.
    // Blank lines (empty records) are skipped.
    bool next(std::vector<std::string>& row) {
        row.clear();
        while (pos_ < content_.size()) {
            ++line_;
            parse_record(row);
            if (row.size() == 1 && row[0].empty()) {
                row.clear();
                continue; // blank line
            }
            return true;
        }
        return false;
    }

    std::size_t line() const { return line_; }

private:
    void parse_record(std::vector<std::string>& row) {
        std::string field;
        bool quoted = false;
        while (pos_ < content_.size()) {
            char c = content_[pos_];
            if (quoted) {
                if (c == '"') {
                    if (pos_ + 1 < content_.size() && content_[pos_ + 1] == '"') {
                        field.push_back('"');
                        pos_ += 2;
                    } else {
                        quoted = false;
                        ++pos_;
                    }
                } else {
                    field.push_back(c);
                    ++pos_;
                }
                continue;
            }
            switch (c) {
            case '"':
                if (!field.empty())
                    throw SchemaError("csv parse error at line " + std::to_string(line_) +
                                      ": quote inside unquoted field");
                quoted = true;
                ++pos_;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                ++pos_;
                break;
            case '\r':
                ++pos_;
                if (pos_ < content_.size() && content_[pos_] == '\n') ++pos_;
                row.push_back(std::move(field));
                return;
            case '\n':
                ++pos_;
                row.push_back(std::move(field));
                return;
            default:
                field.push_back(c);
                ++pos_;
                break;
            }
        }
        if (quoted)
            throw SchemaError("csv parse error at line " + std::to_string(line_) +
                              ": unterminated quoted field");
        row.push_back(std::move(field));
    }

    std::string content_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

inline std::string escape_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

} // namespace discrim::csv
