#include "moenas/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "moenas/error.hpp"

namespace moenas {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto end = line.find(sep, pos);
        out.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
        if (end == std::string_view::npos) {
            return out;
        }
        pos = end + 1;
    }
}

template <class Int>
Int parse_int(std::string_view s) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error("invalid integer '" + std::string(s) + "'");
    }
    return v;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) {
        throw Error("cannot format double");
    }
    return {buf, ptr};
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error("invalid number '" + std::string(s) + "'");
    }
    return v;
}

std::string nds_csv_header() {
    std::string h;
    for (auto name : kGeneNames) {
        h += name;
        h += ',';
    }
    return h + "f1,f2,mc_dice_train,mc_dice_val,e_max,total_epochs,param_count,generation,phase";
}

std::string format_nds_csv(const std::vector<EvaluationRecord>& records) {
    std::string out = nds_csv_header() + '\n';
    for (const auto& r : records) {
        for (std::size_t i = 0; i < kGeneCount; ++i) {
            if (i >= 3 && i <= 6) {
                out += op_name(r.genome.ops[i - 3]);
            } else {
                out += std::to_string(gene_value(i, gene_index(r.genome, i)));
            }
            out += ',';
        }
        out += format_double(r.objectives.f1) + ',' + format_double(r.objectives.f2) + ',';
        out += format_double(r.metrics.mc_dice_train) + ',' + format_double(r.metrics.mc_dice_val) + ',';
        out += std::to_string(r.metrics.e_max) + ',' + std::to_string(r.metrics.total_epochs) + ',';
        out += std::to_string(r.param_count) + ',' + std::to_string(r.generation) + ',';
        out += phase_name(r.phase);
        out += '\n';
    }
    return out;
}

void write_nds_csv(const std::filesystem::path& path, const std::vector<EvaluationRecord>& records) {
    write_file(path, format_nds_csv(records));
}

std::vector<EvaluationRecord> parse_nds_csv(std::string_view text) {
    std::vector<EvaluationRecord> out;
    const auto lines = split(text, '\n');
    if (lines.empty() || lines[0] != nds_csv_header()) {
        throw Error("NDS CSV: unexpected header");
    }
    for (std::size_t n = 1; n < lines.size(); ++n) {
        const auto line = lines[n];
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line, ',');
        const std::string where = "NDS CSV line " + std::to_string(n + 1) + ": ";
        if (cells.size() != kGeneCount + 9) {
            throw Error(where + "expected " + std::to_string(kGeneCount + 9) + " columns");
        }
        try {
            std::string text_genome;
            for (std::size_t i = 0; i < kGeneCount; ++i) {
                if (i > 0) {
                    text_genome += ',';
                }
                text_genome += std::string(kGeneNames[i]) + "=" + std::string(cells[i]);
            }
            EvaluationRecord r;
            r.genome = parse_genome(text_genome);
            std::size_t c = kGeneCount;
            r.objectives.f1 = parse_double(cells[c++]);
            r.objectives.f2 = parse_double(cells[c++]);
            r.metrics.mc_dice_train = parse_double(cells[c++]);
            r.metrics.mc_dice_val = parse_double(cells[c++]);
            r.metrics.e_max = parse_int<int>(cells[c++]);
            r.metrics.total_epochs = parse_int<int>(cells[c++]);
            r.param_count = parse_int<std::int64_t>(cells[c++]);
            r.generation = parse_int<int>(cells[c++]);
            r.phase = parse_phase(cells[c++]);
            out.push_back(r);
        } catch (const Error& ex) {
            throw Error(where + ex.what());
        }
    }
    return out;
}

std::vector<EvaluationRecord> read_nds_csv(const std::filesystem::path& path) {
    return parse_nds_csv(read_file(path));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw Error("write failed for '" + path.string() + "'");
    }
}

} // namespace moenas
