#ifndef SOFTRB_IO_HPP
#define SOFTRB_IO_HPP

///
/// \file io.hpp
///
/// File formats: Matrix Market (coordinate, real, general), trajectory CSV
/// and plain `key = value` manifests.
///

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "softrb/numerics.hpp"
#include "softrb/timeint.hpp"

namespace softrb::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes the nonzero entries with 17 significant digits, 1-based indices.
void write_matrix_market(const std::filesystem::path& path, const Matrix& M,
                         const std::string& comment = {});

Matrix read_matrix_market(const std::filesystem::path& path);

/// One row per time node: t, then state entries. Header `t,x0,x1,…`.
void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& traj);

/// Same layout for an arbitrary per-node matrix (e.g. outputs C·x).
void write_columns_csv(const std::filesystem::path& path, const TimeGrid& grid,
                       const Matrix& columns, const std::string& prefix);

using Manifest = std::vector<std::pair<std::string, std::string>>;

void write_manifest(const std::filesystem::path& path, const Manifest& entries);

}  // namespace softrb::io

#endif  // SOFTRB_IO_HPP
