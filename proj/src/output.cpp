#include "fpqc/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fpqc/errors.hpp"
#include "fpqc/state.hpp"

namespace fpqc {

namespace {

void append_number(std::string& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    out.close();
    if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace

std::vector<std::string> csv_header(int levels) {
    std::vector<std::string> h = {"step", "time", "o_t", "u_t", "R_t", "trace_defect", "herm_defect"};
    for (const Slot& s : canonical_slots(levels)) {
        const std::string base = "rho_" + std::to_string(s.row) + "_" + std::to_string(s.col);
        h.push_back(base + "_re");
        h.push_back(base + "_im");
    }
    return h;
}

std::string trajectory_csv(const Trajectory& traj) {
    const int l = traj.initial_state.size() > 0 ? levels_from_length(traj.initial_state.size()) : 0;
    std::string out;
    const auto header = csv_header(l);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out += std::to_string(k + 1);
        const double fields[] = {traj.times[k],
                                 traj.outputs[k],
                                 traj.controls[k],
                                 traj.control_variances[k],
                                 traj.diagnostics[k].trace_defect,
                                 traj.diagnostics[k].hermiticity_defect};
        for (double f : fields) {
            out += ',';
            append_number(out, f);
        }
        for (const cplx& z : traj.states[k]) {
            out += ',';
            append_number(out, z.real());
            out += ',';
            append_number(out, z.imag());
        }
        out += '\n';
    }
    return out;
}

void export_csv(const Trajectory& traj, const std::filesystem::path& path) { write_file(path, trajectory_csv(traj)); }

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError("csv: no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::values(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw ValidationError("csv line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(t.header.size()) + " fields, found " + std::to_string(cells.size()));
        }
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const std::string& c = cells[i];
            const auto res = std::from_chars(c.data(), c.data() + c.size(), row[i]);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
                throw ValidationError("csv line " + std::to_string(line_no) + ": bad number '" + c + "'");
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable import_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string fmt(double v) {
    std::string s;
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    s.append(buf, res.ptr);
    return s;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Series {
    std::vector<double> x;
    std::vector<double> y;
};

std::string line_plot(const Series& s, const std::string& title, const std::string& ylabel,
                      const double* reference) {
    double xmin = s.x.front(), xmax = s.x.back();
    if (xmax <= xmin) xmax = xmin + 1.0;
    double ymin = *std::min_element(s.y.begin(), s.y.end());
    double ymax = *std::max_element(s.y.begin(), s.y.end());
    if (reference) {
        ymin = std::min(ymin, *reference);
        ymax = std::max(ymax, *reference);
    }
    if (!std::isfinite(ymin) || !std::isfinite(ymax)) ymin = -1.0, ymax = 1.0;
    if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    os << "<title>" << escape(title) << "</title>\n";
    if (reference) os << "<desc>reference o_d=" << fmt(*reference) << "</desc>\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        os << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4
           << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
        os << "<text x=\"" << px(xv) << "\" y=\"" << kTop + ph + 16
           << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    }
    os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
       << "\" font-size=\"12\" text-anchor=\"middle\">time step</text>\n";
    os << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << kTop + ph / 2 << ")\">" << escape(ylabel) << "</text>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">" << escape(title)
       << "</text>\n";
    if (reference) {
        os << "<line id=\"reference\" data-value=\"" << fmt(*reference) << "\" x1=\"" << kLeft << "\" y1=\""
           << py(*reference) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << py(*reference)
           << "\" stroke=\"red\" stroke-dasharray=\"6 4\"/>\n";
    }
    os << "<polyline id=\"series\" fill=\"none\" stroke=\"blue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) os << ' ';
        os << fmt(px(s.x[i])) << ',' << fmt(py(std::isfinite(s.y[i]) ? s.y[i] : ymin));
    }
    os << "\"/>\n</svg>\n";
    return os.str();
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const Trajectory& traj, double o_d, const std::filesystem::path& stem,
                                              const std::string& title) {
    if (traj.size() == 0) throw ValidationError("emit_plots: empty trajectory");
    Series out, ctl;
    out.x.push_back(0.0);
    out.y.push_back(traj.initial_output);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out.x.push_back(static_cast<double>(k + 1));
        out.y.push_back(traj.outputs[k]);
        ctl.x.push_back(static_cast<double>(k));
        ctl.y.push_back(traj.controls[k]);
    }
    const std::string prefix = title.empty() ? "" : title + ": ";
    std::filesystem::path output_path = stem;
    output_path += "_output.svg";
    std::filesystem::path control_path = stem;
    control_path += "_control.svg";
    write_file(output_path, line_plot(out, prefix + "measurement output", "o_t", &o_d));
    write_file(control_path, line_plot(ctl, prefix + "control", "u_t", nullptr));
    return {output_path, control_path};
}

}  // namespace fpqc
