#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace neda {

// Declarative experiment file: `[section]` headers with `key = value` lines,
// `#` comments. Values may be comma-separated lists; the grid subcommand
// treats lists as axes, plain runs require single values. Section and key
// order is preserved.
class ConfigFile {
public:
    using Entries = std::vector<std::pair<std::string, std::vector<std::string>>>;

    struct Section {
        std::string name;
        Entries entries;

        const std::vector<std::string>* find(const std::string& key) const {
            for (const auto& [k, v] : entries)
                if (k == key) return &v;
            return nullptr;
        }
    };

    static ConfigFile parse(std::istream& in) {
        ConfigFile cfg;
        std::string line;
        Section* current = nullptr;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string trimmed = trim(strip_comment(line));
            if (trimmed.empty()) continue;
            if (trimmed.front() == '[') {
                if (trimmed.back() != ']')
                    throw std::runtime_error("config line " + std::to_string(line_no) + ": unclosed section header");
                cfg.sections_.push_back({trim(trimmed.substr(1, trimmed.size() - 2)), {}});
                current = &cfg.sections_.back();
                continue;
            }
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos || current == nullptr)
                throw std::runtime_error("config line " + std::to_string(line_no) + ": expected 'key = value'");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            std::vector<std::string> values;
            std::stringstream vs(value);
            std::string item;
            while (std::getline(vs, item, ',')) values.push_back(trim(item));
            if (values.empty()) values.push_back("");
            current->entries.emplace_back(key, std::move(values));
        }
        return cfg;
    }

    static ConfigFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        return parse(in);
    }

    const std::vector<Section>& sections() const { return sections_; }

    const Section* find_section(const std::string& name) const {
        for (const auto& s : sections_)
            if (s.name == name) return &s;
        return nullptr;
    }

private:
    static std::string strip_comment(const std::string& s) {
        const auto pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }
    static std::string trim(const std::string& s) {
        auto begin = s.begin(), end = s.end();
        while (begin != end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
        while (end != begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) --end;
        return std::string(begin, end);
    }

    std::vector<Section> sections_;
};

} // namespace neda
