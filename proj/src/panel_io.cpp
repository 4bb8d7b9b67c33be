#include "panel_logit/panel_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "panel_logit/errors.hpp"

namespace panel_logit {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

long parse_int(const std::string& s, std::size_t line) {
    long v = 0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw ConfigError("panel csv line " + std::to_string(line) + ": '" + s + "' is not an integer");
    return v;
}

struct Cell {
    std::size_t person;
    long t;
    std::uint8_t y;
};

}  // namespace

PanelData read_panel_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<std::string> ids;
    std::unordered_map<std::string, std::size_t> id_index;
    std::vector<Cell> cells;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string row = trim(line);
        if (row.empty() || row.front() == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const auto comma = row.find(',', start);
            fields.push_back(trim(std::string_view(row).substr(start, comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!have_header) {
            if (fields != std::vector<std::string>{"id", "t", "y"})
                throw ConfigError("panel csv: expected header 'id,t,y'");
            have_header = true;
            continue;
        }
        if (fields.size() != 3)
            throw ConfigError("panel csv line " + std::to_string(line_no) + ": expected 3 fields");
        if (fields[0].empty()) throw ConfigError("panel csv line " + std::to_string(line_no) + ": empty id");
        const long t = parse_int(fields[1], line_no);
        const long y = parse_int(fields[2], line_no);
        if (y != 0 && y != 1)
            throw ConfigError("panel csv line " + std::to_string(line_no) + ": y must be 0 or 1");
        auto [it, inserted] = id_index.try_emplace(fields[0], ids.size());
        if (inserted) ids.push_back(fields[0]);
        cells.push_back({it->second, t, static_cast<std::uint8_t>(y)});
    }
    if (!have_header) throw ConfigError("panel csv: missing header");
    if (cells.empty()) throw ConfigError("panel csv: no observations");

    const auto [lo, hi] = std::minmax_element(cells.begin(), cells.end(),
                                              [](const Cell& a, const Cell& b) { return a.t < b.t; });
    const long t0 = lo->t;
    const long periods = hi->t - t0 + 1;
    const auto n = static_cast<std::int64_t>(ids.size());
    if (static_cast<long>(cells.size()) != n * periods)
        throw ConfigError("panel csv: panel is not rectangular (" + std::to_string(cells.size()) +
                          " rows for " + std::to_string(n) + " individuals x " + std::to_string(periods) +
                          " periods)");

    PanelData panel(n, static_cast<int>(periods), static_cast<int>(t0), ids);
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(n * periods), 0);
    for (const auto& c : cells) {
        const auto k = c.person * static_cast<std::size_t>(periods) + static_cast<std::size_t>(c.t - t0);
        if (seen[k]) throw ConfigError("panel csv: duplicate row for id '" + ids[c.person] + "', t=" +
                                       std::to_string(c.t));
        seen[k] = 1;
        panel.set(static_cast<std::int64_t>(c.person), static_cast<int>(c.t), c.y);
    }
    return panel;
}

PanelData read_panel_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open panel file '" + path + "'");
    return read_panel_csv(in);
}

void write_panel_csv(std::ostream& out, const PanelData& panel) {
    out << "id,t,y\n";
    for (std::int64_t i = 0; i < panel.n(); ++i) {
        const std::string id = panel.id(i);
        for (int t = panel.t0(); t <= panel.last_period(); ++t)
            out << id << ',' << t << ',' << static_cast<int>(panel.at(i, t)) << '\n';
    }
}

void write_panel_csv_file(const std::string& path, const PanelData& panel) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    write_panel_csv(out, panel);
    if (!out) throw ConfigError("write failed for '" + path + "'");
}

}  // namespace panel_logit
