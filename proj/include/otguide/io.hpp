#pragma once

#include "otguide/diagnostics.hpp"
#include "otguide/image.hpp"
#include "otguide/measures.hpp"
#include "otguide/pipeline.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace otguide::io {

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

// Headerless numeric CSV, one row per line. Blank lines are skipped; ragged
// rows or unparsable fields raise InputError naming `source` and the line.
Eigen::MatrixXd parse_csv_matrix(std::string_view text, std::string_view source);
Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path);
void write_csv_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& matrix);

EmbeddingList read_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, std::span<const Embedding> embeddings);

// Binary P6 with [-1, 1] mapped linearly onto 0..255.
void write_ppm(const std::filesystem::path& path, const Image& image);

// Header: iter,loss,transport_cost,marginal_err,count_0,...,count_{m-1}
std::string trajectory_csv(const TrajectoryRecord& trajectory, std::size_t prompts);

// Header: patch,phi_0..phi_{m-1},w_0..w_{m-1},assigned
std::string tangent_csv(const TangentReport& report);

// Header: patch,assigned,dist_0..dist_{m-1}
std::string assignment_csv(const AssignmentReport& report);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace otguide::io
