#include "otguide/io.hpp"

#include "otguide/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace otguide::io {

namespace {

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string location(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line);
}

double parse_field(std::string_view field, std::string_view source, std::size_t line) {
    std::string_view text = trim(field);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw InputError(location(source, line) + ": cannot parse '" + std::string(trim(field)) +
                         "' as a number");
    }
    if (!std::isfinite(value)) {
        throw InputError(location(source, line) + ": non-finite value '" +
                         std::string(trim(field)) + "'");
    }
    return value;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

Eigen::MatrixXd parse_csv_matrix(std::string_view text, std::string_view source) {
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t eol = text.find('\n');
        const std::string_view line = trim(text.substr(0, eol));
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (line.empty()) continue;

        std::vector<double> row;
        std::string_view rest = line;
        while (true) {
            const std::size_t comma = rest.find(',');
            row.push_back(parse_field(rest.substr(0, comma), source, line_no));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw InputError(location(source, line_no) + ": expected " +
                             std::to_string(rows.front().size()) + " fields, found " +
                             std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw InputError(std::string(source) + ": no data rows");
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return out;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path) {
    return parse_csv_matrix(read_text(path), path.string());
}

void write_csv_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& matrix) {
    std::string text;
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
            if (j > 0) text += ',';
            text += format_double(matrix(i, j));
        }
        text += '\n';
    }
    write_text(path, text);
}

EmbeddingList read_embeddings(const std::filesystem::path& path) {
    const Eigen::MatrixXd rows = read_csv_matrix(path);
    EmbeddingList out;
    out.reserve(static_cast<std::size_t>(rows.rows()));
    for (Eigen::Index i = 0; i < rows.rows(); ++i) out.push_back(rows.row(i).transpose());
    return out;
}

void write_embeddings(const std::filesystem::path& path, std::span<const Embedding> embeddings) {
    if (embeddings.empty()) {
        write_text(path, "");
        return;
    }
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(embeddings.size()), embeddings.front().size());
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        rows.row(static_cast<Eigen::Index>(i)) = embeddings[i].transpose();
    }
    write_csv_matrix(path, rows);
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
    std::string data = "P6\n" + std::to_string(image.width()) + " " +
                       std::to_string(image.height()) + "\n255\n";
    const Eigen::VectorXd& px = image.pixels();
    data.reserve(data.size() + static_cast<std::size_t>(px.size()));
    for (Eigen::Index k = 0; k < px.size(); ++k) {
        const double level = std::round((std::clamp(px[k], -1.0, 1.0) + 1.0) * 127.5);
        data.push_back(static_cast<char>(static_cast<unsigned char>(level)));
    }
    write_text(path, data);
}

std::string trajectory_csv(const TrajectoryRecord& trajectory, std::size_t prompts) {
    std::string text = "iter,loss,transport_cost,marginal_err";
    for (std::size_t j = 0; j < prompts; ++j) text += ",count_" + std::to_string(j);
    text += '\n';
    for (const TrajectoryRow& row : trajectory.rows) {
        text += std::to_string(row.iteration) + ',' + format_double(row.loss) + ',' +
                format_double(row.transport_cost) + ',' + format_double(row.marginal_error);
        for (const int c : row.counts) text += ',' + std::to_string(c);
        text += '\n';
    }
    return text;
}

std::string tangent_csv(const TangentReport& report) {
    const Eigen::Index m = report.phi.cols();
    std::string text = "patch";
    for (Eigen::Index j = 0; j < m; ++j) text += ",phi_" + std::to_string(j);
    for (Eigen::Index j = 0; j < m; ++j) text += ",w_" + std::to_string(j);
    text += ",assigned\n";
    for (Eigen::Index i = 0; i < report.phi.rows(); ++i) {
        text += std::to_string(i);
        for (Eigen::Index j = 0; j < m; ++j) text += ',' + format_double(report.phi(i, j));
        for (Eigen::Index j = 0; j < m; ++j) text += ',' + format_double(report.pushforward(i, j));
        text += ',' + std::to_string(report.assigned[static_cast<std::size_t>(i)]) + '\n';
    }
    return text;
}

std::string assignment_csv(const AssignmentReport& report) {
    const Eigen::Index m = report.distances.cols();
    std::string text = "patch,assigned";
    for (Eigen::Index j = 0; j < m; ++j) text += ",dist_" + std::to_string(j);
    text += '\n';
    for (Eigen::Index i = 0; i < report.distances.rows(); ++i) {
        text += std::to_string(i) + ',' + std::to_string(report.assigned[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < m; ++j) text += ',' + format_double(report.distances(i, j));
        text += '\n';
    }
    return text;
}

}  // namespace otguide::io
