#include "siselab/io.hpp"

#include "siselab/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace siselab {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void line_col_at(const std::string& text, std::size_t byte, int& line, int& col) {
    line = 1;
    col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
}

json parse_json_file(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 1, col = 1;
        line_col_at(text, e.byte > 0 ? e.byte - 1 : 0, line, col);
        throw IoError(path + ": malformed JSON at line " + std::to_string(line) +
                      ", column " + std::to_string(col) + ": " + e.what());
    }
}

Matrix parse_matrix(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw IoError(path + ": \"" + key + "\" must be a nested array of numbers");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols)
            throw IoError(path + ": \"" + key + "\" rows have inconsistent lengths");
        for (int k = 0; k < cols; ++k) {
            if (!j[i][k].is_number())
                throw IoError(path + ": \"" + key + "\" contains a non-numeric entry");
            M(i, k) = j[i][k].get<double>();
        }
    }
    return M;
}

json matrix_to_json(const Matrix& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

LinearSystem read_system_json(const std::string& path) {
    const json j = parse_json_file(path);
    if (!j.is_object()) throw IoError(path + ": system file must be a JSON object");

    static const std::set<std::string> known = {"A", "G", "C", "H", "Q", "R", "B", "D"};
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key))
            throw IoError(path + ": unknown key \"" + key + "\" in system file");
    }
    for (const char* key : {"A", "G", "C", "Q", "R"}) {
        if (!j.contains(key))
            throw IoError(path + ": missing required key \"" + std::string(key) + "\"");
    }

    const Matrix A = parse_matrix(j["A"], "A", path);
    const Matrix G = parse_matrix(j["G"], "G", path);
    const Matrix C = parse_matrix(j["C"], "C", path);
    const Matrix Q = parse_matrix(j["Q"], "Q", path);
    const Matrix R = parse_matrix(j["R"], "R", path);
    Matrix H;
    if (j.contains("H")) H = parse_matrix(j["H"], "H", path);
    Matrix B, D;
    if (j.contains("B")) B = parse_matrix(j["B"], "B", path);
    if (j.contains("D")) D = parse_matrix(j["D"], "D", path);

    try {
        return make_system(A, G, C, H, Q, R, B, D);
    } catch (const ShapeError& e) {
        throw IoError(path + ": " + e.what());
    }
}

void write_system_json(const std::string& path, const LinearSystem& sys) {
    json j;
    j["A"] = matrix_to_json(sys.A);
    j["G"] = matrix_to_json(sys.G);
    j["C"] = matrix_to_json(sys.C);
    j["H"] = matrix_to_json(sys.H);
    j["Q"] = matrix_to_json(sys.Q);
    j["R"] = matrix_to_json(sys.R);
    if (sys.q > 0) {
        j["B"] = matrix_to_json(sys.B);
        j["D"] = matrix_to_json(sys.D);
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
    const int m =
        traj.disturbances.empty() ? 0 : static_cast<int>(traj.disturbances[0].size());
    const int p =
        traj.measurements.empty() ? 0 : static_cast<int>(traj.measurements[0].size());

    out << "t";
    for (int i = 1; i <= n; ++i) out << ",x_" << i;
    for (int i = 1; i <= m; ++i) out << ",d_" << i;
    for (int i = 1; i <= p; ++i) out << ",y_" << i;
    out << "\n";
    for (int t = 0; t <= traj.horizon; ++t) {
        out << t;
        for (int i = 0; i < n; ++i) out << "," << format_double(traj.states[t](i));
        for (int i = 0; i < m; ++i) out << "," << format_double(traj.disturbances[t](i));
        for (int i = 0; i < p; ++i) out << "," << format_double(traj.measurements[t](i));
        out << "\n";
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, const std::string& path, int lineno) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(lineno) + ": bad numeric field \"" +
                      s + "\"");
    }
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    CsvTable table;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (table.header.empty()) {
            table.header = split_csv_line(line);
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != table.header.size())
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(table.header.size()) + " fields, got " +
                          std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_number(f, path, lineno));
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw IoError(path + ": empty CSV file");
    return table;
}

int count_prefixed(const std::vector<std::string>& header, const std::string& prefix) {
    int count = 0;
    for (const auto& h : header)
        if (h.rfind(prefix, 0) == 0) ++count;
    return count;
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

}  // namespace

Trajectory read_trajectory_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int n = count_prefixed(table.header, "x_");
    const int m = count_prefixed(table.header, "d_");
    const int p = count_prefixed(table.header, "y_");
    if (n == 0 || m == 0 || p == 0)
        throw IoError(path + ": trajectory CSV must carry x_*, d_* and y_* columns");

    auto columns_for = [&](const std::string& prefix, int count) {
        std::vector<int> cols;
        for (int i = 1; i <= count; ++i) {
            const int c = find_column(table.header, prefix + std::to_string(i));
            if (c < 0)
                throw IoError(path + ": missing column " + prefix + std::to_string(i));
            cols.push_back(c);
        }
        return cols;
    };
    const auto xc = columns_for("x_", n);
    const auto dc = columns_for("d_", m);
    const auto yc = columns_for("y_", p);

    Trajectory traj;
    traj.horizon = static_cast<int>(table.rows.size()) - 1;
    for (const auto& row : table.rows) {
        Vector x(n), d(m), y(p);
        for (int i = 0; i < n; ++i) x(i) = row[xc[i]];
        for (int i = 0; i < m; ++i) d(i) = row[dc[i]];
        for (int i = 0; i < p; ++i) y(i) = row[yc[i]];
        traj.states.push_back(x);
        traj.disturbances.push_back(d);
        traj.measurements.push_back(y);
    }
    return traj;
}

std::vector<Vector> read_measurements_csv(const std::string& path, int p) {
    const CsvTable table = read_csv(path);
    const int found = count_prefixed(table.header, "y_");
    if (found == 0) throw IoError(path + ": no y_* columns found");
    if (p > 0 && found != p)
        throw IoError(path + ": expected " + std::to_string(p) + " measurement columns, found " +
                      std::to_string(found));
    std::vector<int> cols;
    for (int i = 1; i <= found; ++i) {
        const int c = find_column(table.header, "y_" + std::to_string(i));
        if (c < 0) throw IoError(path + ": missing column y_" + std::to_string(i));
        cols.push_back(c);
    }
    std::vector<Vector> ys;
    ys.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        Vector y(found);
        for (int i = 0; i < found; ++i) y(i) = row[cols[i]];
        ys.push_back(y);
    }
    return ys;
}

void write_estimates_csv(const std::string& path, const Estimates& est) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    const int n = est.xhat.empty() ? 0 : static_cast<int>(est.xhat[0].size());
    const int m = est.dhat.empty() ? 0 : static_cast<int>(est.dhat[0].size());
    out << "t";
    for (int i = 1; i <= n; ++i) out << ",xhat_" << i;
    for (int i = 1; i <= m; ++i) out << ",dhat_" << i;
    out << ",trP\n";
    for (std::size_t t = 0; t < est.xhat.size(); ++t) {
        out << t;
        for (int i = 0; i < n; ++i) out << "," << format_double(est.xhat[t](i));
        for (int i = 0; i < m; ++i) out << "," << format_double(est.dhat[t](i));
        out << "," << format_double(est.trace_P[t]) << "\n";
    }
}

void write_gains_jsonl(const std::string& path, const Estimates& est) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t i = 0; i < est.K_gains.size(); ++i) {
        json j;
        j["t"] = i + 1;
        j["K"] = matrix_to_json(est.K_gains[i]);
        j["M"] = matrix_to_json(est.M_gains[i]);
        out << j.dump() << "\n";
    }
}

}  // namespace siselab
