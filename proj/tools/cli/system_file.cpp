#include "cli/system_file.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "deadbeat/errors.hpp"

namespace deadbeat::cli {

namespace {

using nlohmann::json;

int read_dim(const json& doc, const char* key) {
    if (!doc.contains(key)) throw InvalidInput(std::string("field '") + key + "': missing");
    const json& v = doc.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 1)
        throw InvalidInput(std::string("field '") + key + "': expected a positive integer");
    return v.get<int>();
}

Matrix read_array(const json& doc, const char* key, int rows, int cols) {
    if (!doc.contains(key)) throw InvalidInput(std::string("field '") + key + "': missing");
    const json& v = doc.at(key);
    const auto expected = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    if (!v.is_array() || v.size() != expected)
        throw InvalidInput(std::string("field '") + key + "': expected an array of " +
                           std::to_string(expected) + " numbers");
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const json& e = v[static_cast<std::size_t>(i * cols + j)];
            if (!e.is_number())
                throw InvalidInput(std::string("field '") + key + "': entry " +
                                   std::to_string(i * cols + j) + " is not a number");
            const double d = e.get<double>();
            if (!std::isfinite(d))
                throw InvalidInput(std::string("field '") + key + "': non-finite entry");
            M(i, j) = d;
        }
    }
    return M;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    return in;
}

}  // namespace

LinearSystem parse_system(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("system file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidInput("system file must be a JSON object");
    const int n = read_dim(doc, "n");
    const int m = read_dim(doc, "m");
    LinearSystem sys;
    sys.A = read_array(doc, "A", n, n);
    sys.B = read_array(doc, "B", n, m);
    if (doc.contains("form")) {
        const json& f = doc.at("form");
        if (f == "factored") sys.form = SystemForm::Factored;
        else if (f == "standard") sys.form = SystemForm::Standard;
        else throw InvalidInput("field 'form': expected \"factored\" or \"standard\"");
    }
    sys.validate();
    return sys;
}

LinearSystem load_system(const std::string& path) {
    auto in = open_or_throw(path);
    return parse_system(in);
}

Matrix parse_matrix_text(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size() || !std::isfinite(v))
                throw InvalidInput("matrix text: bad number '" + tok + "'");
            row.push_back(v);
        }
        if (row.empty()) continue;
        if (!rows.empty() && row.size() != rows.front().size())
            throw InvalidInput("matrix text: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidInput("matrix text: no rows");
    Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return M;
}

Matrix load_matrix_text(const std::string& path) {
    auto in = open_or_throw(path);
    return parse_matrix_text(in);
}

Vector parse_vector(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw InvalidInput("vector: bad number '" + tok + "'");
        }
        while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
        if (used != tok.size() || !std::isfinite(v)) throw InvalidInput("vector: bad number '" + tok + "'");
        vals.push_back(v);
    }
    if (vals.empty()) throw InvalidInput("vector: empty");
    return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Tolerance tolerance_from_env(const char* value, Tolerance base) {
    if (value == nullptr || *value == '\0') return base;
    const Vector parts = parse_vector(value);
    if (parts.size() > 2) throw InvalidInput("DEADBEAT_TOL: expected 'rank_rel[,residual_rel]'");
    base.rank_rel = parts(0);
    if (parts.size() == 2) base.residual_rel = parts(1);
    base.validate();
    return base;
}

}  // namespace deadbeat::cli
