#include "lait/jsonl.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lait/errors.hpp"

using nlohmann::json;

namespace lait {

namespace {

json parse_line(const std::string& line, long lineno) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed JSON: ") + e.what(), lineno);
    }
}

template <typename Fn>
void for_each_jsonl_line(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        fn(parse_line(line, lineno), lineno);
    }
}

}  // namespace

std::vector<SegmentedExample> read_examples_jsonl(const std::string& path,
                                                  const ModelConfig& cfg) {
    std::vector<SegmentedExample> out;
    for_each_jsonl_line(path, [&](const json& j, long lineno) {
        try {
            if (!j.is_object() || !j.contains("task"))
                throw InputError("expected an object with a \"task\" key");
            const std::string task = j.at("task").get<std::string>();
            std::optional<std::string> label;
            if (j.contains("label") && !j.at("label").is_null())
                label = j.at("label").get<std::string>();

            if (task == "raw") {
                if (!j.contains("fields") || !j.at("fields").is_array())
                    throw InputError("raw task expects \"fields\" as an array of segment texts");
                std::vector<std::string> segments;
                for (const auto& s : j.at("fields")) segments.push_back(s.get<std::string>());
                out.push_back(make_raw_example(segments, label, cfg));
            } else {
                if (!j.contains("fields") || !j.at("fields").is_object())
                    throw InputError("expected \"fields\" as an object of name -> text");
                std::map<std::string, std::string> fields;
                for (auto it = j.at("fields").begin(); it != j.at("fields").end(); ++it)
                    fields[it.key()] = it.value().get<std::string>();
                out.push_back(make_example(task, fields, label, cfg));
            }
        } catch (const InputError& e) {
            if (e.line() > 0) throw;
            throw InputError(e.what(), lineno);
        } catch (const json::exception& e) {
            throw InputError(std::string("malformed example: ") + e.what(), lineno);
        }
    });
    if (out.empty()) throw InputError("no examples in " + path);
    return out;
}

std::vector<LengthRecord> read_length_records_jsonl(const std::string& path) {
    std::vector<LengthRecord> out;
    for_each_jsonl_line(path, [&](const json& j, long lineno) {
        try {
            LengthRecord rec;
            if (!j.is_object() || !j.contains("lengths"))
                throw InputError("expected an object with a \"lengths\" array");
            for (const auto& l : j.at("lengths")) {
                const int64_t v = l.get<int64_t>();
                if (v <= 0) throw InputError("lengths must be positive");
                rec.lengths.push_back(static_cast<uint64_t>(v));
            }
            if (j.contains("mult")) {
                const int64_t m = j.at("mult").get<int64_t>();
                if (m <= 0) throw InputError("mult must be positive");
                rec.multiplicity = static_cast<uint64_t>(m);
            }
            if (j.contains("digests")) {
                for (const auto& d : j.at("digests"))
                    rec.segment_digests.push_back(parse_digest_hex(d.get<std::string>()));
                if (rec.segment_digests.size() != rec.lengths.size())
                    throw InputError("digests must match lengths one to one");
            }
            out.push_back(std::move(rec));
        } catch (const InputError& e) {
            if (e.line() > 0) throw;
            throw InputError(e.what(), lineno);
        } catch (const json::exception& e) {
            throw InputError(std::string("malformed length record: ") + e.what(), lineno);
        }
    });
    if (out.empty()) throw InputError("no length records in " + path);
    return out;
}

std::string digest_hex(uint64_t digest) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, digest >>= 4) s[static_cast<size_t>(i)] = digits[digest & 0xf];
    return s;
}

uint64_t parse_digest_hex(const std::string& hex) {
    if (hex.empty() || hex.size() > 16) throw InputError("bad digest hex: " + hex);
    uint64_t v = 0;
    for (char c : hex) {
        v <<= 4;
        if (c >= '0' && c <= '9') v |= static_cast<uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') v |= static_cast<uint64_t>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F') v |= static_cast<uint64_t>(c - 'A' + 10);
        else throw InputError("bad digest hex: " + hex);
    }
    return v;
}

}  // namespace lait
