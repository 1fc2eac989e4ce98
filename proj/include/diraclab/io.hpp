#pragma once

// Output writers with bit-specified formats:
//   frames.csv   header `t,x,density,upper_density,lower_density`,
//                t-major / x-minor rows, 9 significant digits;
//   heatmap.ppm  binary P6, width = grid points, height = frames, gray
//                levels normalized to the global density maximum,
//                row 0 = earliest frame;
//   spectrum.csv `index,eigenvalue`.
// All writers are deterministic: identical inputs give identical bytes.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "diraclab/common.hpp"
#include "diraclab/core.hpp"
#include "diraclab/dynamics.hpp"
#include "diraclab/ionsim.hpp"
#include "diraclab/klein.hpp"

namespace diraclab {

namespace detail {

class CsvFile {
 public:
  CsvFile(const std::string& path) : path_(path), f_(std::fopen(path.c_str(), "wb")) {
    if (f_ == nullptr)
      throw validation_error("cannot open '" + path + "' for writing");
  }
  ~CsvFile() {
    if (f_ != nullptr) std::fclose(f_);
  }
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;

  template <typename... Args>
  void printf(const char* fmt, Args... args) {
    if (std::fprintf(f_, fmt, args...) < 0)
      throw validation_error("write failure on '" + path_ + "'");
  }

  void puts(const char* text) {
    if (std::fputs(text, f_) < 0)
      throw validation_error("write failure on '" + path_ + "'");
  }

  void close() {
    if (std::fclose(f_) != 0) {
      f_ = nullptr;
      throw validation_error("write failure closing '" + path_ + "'");
    }
    f_ = nullptr;
  }

 private:
  std::string path_;
  std::FILE* f_;
};

}  // namespace detail

inline void write_frames_csv(const std::vector<Frame>& frames,
                             const Grid& grid, const std::string& path) {
  if (frames.empty())
    throw validation_error("write_frames_csv: no frames to write");
  for (const auto& fr : frames)
    if (fr.upper_density.size() != grid.n() ||
        fr.lower_density.size() != grid.n())
      throw validation_error("write_frames_csv: frame/grid size mismatch");

  detail::CsvFile f(path);
  f.puts("t,x,density,upper_density,lower_density\n");
  for (const auto& fr : frames)
    for (int i = 0; i < grid.n(); ++i) {
      const double u = fr.upper_density[i], l = fr.lower_density[i];
      f.printf("%.9g,%.9g,%.9g,%.9g,%.9g\n", fr.t, grid.x(i), u + l, u, l);
    }
  f.close();
}

inline void write_heatmap_ppm(const std::vector<Frame>& frames,
                              const std::string& path) {
  if (frames.empty())
    throw validation_error("write_heatmap_ppm: no frames to write");
  const Eigen::Index width = frames.front().upper_density.size();
  double global_max = 0.0;
  for (const auto& fr : frames) {
    if (fr.upper_density.size() != width || fr.lower_density.size() != width)
      throw validation_error("write_heatmap_ppm: inconsistent frame sizes");
    for (Eigen::Index i = 0; i < width; ++i)
      global_max = std::max(global_max,
                            fr.upper_density[i] + fr.lower_density[i]);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot open '" + path + "' for writing");
  out << "P6\n" << width << " " << frames.size() << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(width) * 3);
  for (const auto& fr : frames) {
    for (Eigen::Index i = 0; i < width; ++i) {
      const double d = fr.upper_density[i] + fr.lower_density[i];
      const double v = global_max > 0.0 ? d / global_max : 0.0;
      const unsigned char g =
          static_cast<unsigned char>(std::lround(255.0 * v));
      row[3 * i] = row[3 * i + 1] = row[3 * i + 2] = g;
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  out.close();
  if (!out) throw validation_error("write failure on '" + path + "'");
}

inline void write_spectrum_csv(const VecXd& eigenvalues,
                               const std::string& path) {
  if (eigenvalues.size() == 0)
    throw validation_error("write_spectrum_csv: empty spectrum");
  detail::CsvFile f(path);
  f.puts("index,eigenvalue\n");
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
    f.printf("%lld,%.15g\n", static_cast<long long>(i), eigenvalues[i]);
  f.close();
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows,
                            const std::string& path) {
  if (rows.empty()) throw validation_error("write_sweep_csv: no rows");
  detail::CsvFile f(path);
  f.puts("mass,exponent,transmission,lz_probability,abs_delta,status\n");
  for (const auto& r : rows) {
    std::string status = r.ok ? "ok" : r.error;
    for (char& c : status)
      if (c == ',' || c == '\n') c = ';';
    f.printf("%.9g,%.9g,%.9g,%.9g,%.9g,%s\n", r.mass, r.exponent,
             r.transmission, r.lz, r.abs_delta, status.c_str());
  }
  f.close();
}

struct OrbitSample {
  double t = 0.0;
  double x_mean = 0.0;
  double p_mean = 0.0;
  double h2 = 0.0;  // <H^2>
};

inline void write_orbit_csv(const std::vector<OrbitSample>& samples,
                            const std::string& path) {
  if (samples.empty()) throw validation_error("write_orbit_csv: no samples");
  detail::CsvFile f(path);
  f.puts("t,x_mean,p_mean,h2\n");
  for (const auto& s : samples)
    f.printf("%.9g,%.12g,%.12g,%.12g\n", s.t, s.x_mean, s.p_mean, s.h2);
  f.close();
}

inline void write_ion_csv(const std::vector<FidelitySample>& curve,
                          const std::string& path) {
  if (curve.empty()) throw validation_error("write_ion_csv: no samples");
  detail::CsvFile f(path);
  f.puts("t,negative_branch,fidelity,leak\n");
  for (const auto& s : curve)
    f.printf("%.9g,%.9g,%.9g,%.9g\n", s.t, s.ion_negative, s.fidelity,
             s.leak);
  f.close();
}

}  // namespace diraclab
