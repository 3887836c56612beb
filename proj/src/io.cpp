#include "softrb/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace softrb::io {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_matrix_market(const std::filesystem::path& path, const Matrix& M,
                         const std::string& comment) {
  auto out = open_for_write(path);
  Index nnz = 0;
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i) nnz += M(i, j) != 0.0;
  out << "%%MatrixMarket matrix coordinate real general\n";
  if (!comment.empty()) {
    std::istringstream lines(comment);
    for (std::string line; std::getline(lines, line);) out << "% " << line << '\n';
  }
  out << M.rows() << ' ' << M.cols() << ' ' << nnz << '\n';
  for (Index j = 0; j < M.cols(); ++j) {
    for (Index i = 0; i < M.rows(); ++i) {
      if (M(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << M(i, j) << '\n';
    }
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Matrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0) {
    throw IoError("'" + path.string() + "' is not a Matrix Market file");
  }
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (object != "matrix" || format != "coordinate" || field != "real") {
    throw IoError("only real coordinate Matrix Market files are supported");
  }
  const bool symmetric = symmetry == "symmetric";
  while (std::getline(in, line) && !line.empty() && line[0] == '%') {
  }
  std::istringstream size(line);
  Index rows = 0, cols = 0, nnz = 0;
  if (!(size >> rows >> cols >> nnz)) throw IoError("malformed Matrix Market size line");
  Matrix M = Matrix::Zero(rows, cols);
  for (Index k = 0; k < nnz; ++k) {
    Index i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v) || i < 1 || j < 1 || i > rows || j > cols) {
      throw IoError("malformed Matrix Market entry");
    }
    M(i - 1, j - 1) = v;
    if (symmetric) M(j - 1, i - 1) = v;
  }
  return M;
}

void write_columns_csv(const std::filesystem::path& path, const TimeGrid& grid,
                       const Matrix& columns, const std::string& prefix) {
  auto out = open_for_write(path);
  out << 't';
  for (Index i = 0; i < columns.rows(); ++i) out << ',' << prefix << i;
  out << '\n';
  for (Index k = 0; k < columns.cols(); ++k) {
    out << grid.time(k);
    for (Index i = 0; i < columns.rows(); ++i) out << ',' << columns(i, k);
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& traj) {
  write_columns_csv(path, traj.grid, traj.states, "x");
}

void write_manifest(const std::filesystem::path& path, const Manifest& entries) {
  auto out = open_for_write(path);
  for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace softrb::io
