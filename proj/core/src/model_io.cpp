#include "revisit/model_io.hpp"

#include <charconv>
#include <filesystem>
#include <sstream>

#include "revisit/errors.hpp"
#include "revisit/text_format.hpp"

namespace revisit {

namespace {

// Non-empty, non-comment lines with their 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::string_view text) {
    const auto lines = split_lines(text);
    for (std::size_t k = 0; k < lines.size(); ++k) {
      const auto tokens = split_whitespace(lines[k]);
      if (tokens.empty() || tokens.front().front() == '#') {
        continue;
      }
      lines_.push_back({k + 1, tokens});
    }
  }

  bool done() const { return pos_ >= lines_.size(); }
  std::size_t line() const { return done() ? last_line() : lines_[pos_].number; }

  bool peek_is(std::string_view keyword) const {
    return !done() && lines_[pos_].tokens.front() == keyword;
  }

  // Tokens of the next line, which must start with `keyword`.
  std::vector<std::string_view> expect(std::string_view keyword, std::size_t min_args = 0) {
    if (done()) {
      throw ParseError("expected '" + std::string(keyword) + "', got end of input", last_line());
    }
    const auto& l = lines_[pos_];
    if (l.tokens.front() != keyword) {
      throw ParseError("expected '" + std::string(keyword) + "', got '" +
                           std::string(l.tokens.front()) + "'",
                       l.number);
    }
    if (l.tokens.size() < min_args + 1) {
      throw ParseError("'" + std::string(keyword) + "' needs " + std::to_string(min_args) +
                           " value(s)",
                       l.number);
    }
    ++pos_;
    return {l.tokens.begin() + 1, l.tokens.end()};
  }

  // A bare row of numbers.
  std::vector<double> numbers(std::size_t count) {
    const auto& l = row(count);
    std::vector<double> out;
    out.reserve(count);
    for (auto t : l.tokens) {
      out.push_back(parse_double(t, l.number));
    }
    return out;
  }

  std::vector<std::uint64_t> integers(std::size_t count) {
    const auto& l = row(count);
    std::vector<std::uint64_t> out;
    out.reserve(count);
    for (auto t : l.tokens) {
      out.push_back(parse_u64(t, l.number));
    }
    return out;
  }

  void finish() const {
    if (!done()) {
      throw ParseError("unexpected trailing content '" +
                           std::string(lines_[pos_].tokens.front()) + "'",
                       lines_[pos_].number);
    }
  }

 private:
  struct Line {
    std::size_t number;
    std::vector<std::string_view> tokens;
  };
  std::size_t last_line() const { return lines_.empty() ? 0 : lines_.back().number; }

  const Line& row(std::size_t count) {
    if (done()) {
      throw ParseError("expected a row of values, got end of input", last_line());
    }
    const auto& l = lines_[pos_];
    if (l.tokens.size() != count) {
      throw ParseError("expected " + std::to_string(count) + " values, got " +
                           std::to_string(l.tokens.size()),
                       l.number);
    }
    ++pos_;
    return l;
  }

  std::vector<Line> lines_;
  std::size_t pos_ = 0;
};

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << v;
  return out.str();
}

std::uint64_t parse_hex64(std::string_view text, std::size_t line) {
  std::uint64_t value = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value, 16);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("expected a hexadecimal fingerprint, got '" + std::string(text) + "'", line);
  }
  return value;
}

template <typename T>
void write_rows(std::ostringstream& out, std::size_t nu, const std::vector<T>& row_major) {
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t j = 0; j < nu; ++j) {
      if (j > 0) out << ' ';
      if constexpr (std::is_floating_point_v<T>) {
        out << format_double(row_major[i * nu + j]);
      } else {
        out << row_major[i * nu + j];
      }
    }
    out << '\n';
  }
}

void write_model_section(std::ostringstream& out, const ViewModel& model) {
  const std::size_t nu = model.size();
  out << "views " << nu << '\n';
  for (std::size_t k = 0; k < nu; ++k) {
    out << "view " << k << ' ' << model.alphabet.entries()[k] << '\n';
  }
  const auto& e = model.extraction;
  out << "extraction " << format_double(e.gap_threshold) << ' '
      << format_double(e.max_range_margin) << ' ' << format_double(e.corner_angle_threshold)
      << ' ' << format_double(e.line_fit_tolerance) << ' ' << e.min_group_beams << ' '
      << format_double(e.min_corner_leg) << '\n';
  out << "observation\n";
  write_rows(out, nu, model.observation.matrix().row_major());
}

ViewModel read_model_section(LineReader& in) {
  const std::size_t header = in.line();
  const std::size_t nu = parse_size(in.expect("views", 1)[0], header);
  std::vector<std::string> entries;
  for (std::size_t k = 0; k < nu; ++k) {
    const std::size_t number = in.line();
    const auto args = in.expect("view", 2);
    if (parse_size(args[0], number) != k) {
      throw ParseError("view entries must be numbered in order", number);
    }
    entries.emplace_back(args[1]);
  }
  if (entries.empty() || entries.back() != ViewAlphabet::kOther) {
    throw ParseError("the last view must be OTHER", header);
  }
  entries.pop_back();
  ViewModel model;
  try {
    model.alphabet = ViewAlphabet::from_entries(std::move(entries));
  } catch (const DomainError& e) {
    throw ParseError(e.what(), header);
  }

  const std::size_t ex_line = in.line();
  const auto ex = in.expect("extraction", 6);
  model.extraction.gap_threshold = parse_double(ex[0], ex_line);
  model.extraction.max_range_margin = parse_double(ex[1], ex_line);
  model.extraction.corner_angle_threshold = parse_double(ex[2], ex_line);
  model.extraction.line_fit_tolerance = parse_double(ex[3], ex_line);
  model.extraction.min_group_beams = parse_size(ex[4], ex_line);
  model.extraction.min_corner_leg = parse_double(ex[5], ex_line);

  const std::size_t obs_line = in.line();
  in.expect("observation");
  std::vector<double> values;
  for (std::size_t i = 0; i < nu; ++i) {
    const auto row = in.numbers(nu);
    values.insert(values.end(), row.begin(), row.end());
  }
  try {
    model.extraction.validate();
    model.observation = ObservationModel::from_matrix(SquareMatrix<double>(nu, std::move(values)),
                                                      /*require_positive=*/false);
  } catch (const DomainError& e) {
    throw ParseError(e.what(), obs_line);
  }
  return model;
}

}  // namespace

std::string save_view_model(const ViewModel& model) {
  std::ostringstream out;
  out << "# view model v1\n";
  write_model_section(out, model);
  return out.str();
}

ViewModel load_view_model(std::string_view text) {
  LineReader in(text);
  ViewModel model = read_model_section(in);
  in.finish();
  return model;
}

std::string save_prior(const StructurePrior& prior) {
  prior.validate();
  const std::size_t nu = prior.alpha.size();
  std::ostringstream out;
  out << "# structure prior v1\n";
  out << "fingerprint " << hex64(prior.views.alphabet.fingerprint()) << '\n';
  write_model_section(out, prior.views);
  out << "alpha\n";
  write_rows(out, nu, prior.alpha.row_major());
  if (!prior.marginals.empty()) {
    out << "marginals";
    for (double m : prior.marginals) {
      out << ' ' << format_double(m);
    }
    out << '\n';
  }
  if (prior.counts) {
    out << "counts\n";
    write_rows(out, nu, prior.counts->row_major());
  }
  return out.str();
}

StructurePrior load_prior(std::string_view text) {
  LineReader in(text);
  const std::size_t fp_line = in.line();
  const std::uint64_t fingerprint = parse_hex64(in.expect("fingerprint", 1)[0], fp_line);

  StructurePrior prior;
  prior.views = read_model_section(in);
  if (prior.views.alphabet.fingerprint() != fingerprint) {
    throw ParseError("alphabet fingerprint does not match the listed views", fp_line);
  }
  const std::size_t nu = prior.views.size();

  const std::size_t alpha_line = in.line();
  in.expect("alpha");
  std::vector<double> alpha;
  for (std::size_t i = 0; i < nu; ++i) {
    const auto row = in.numbers(nu);
    alpha.insert(alpha.end(), row.begin(), row.end());
  }
  try {
    prior.alpha = HyperMatrix::from_row_major(nu, std::move(alpha));
  } catch (const DomainError& e) {
    throw ParseError(e.what(), alpha_line);
  }

  if (in.peek_is("marginals")) {
    const std::size_t number = in.line();
    const auto args = in.expect("marginals", nu);
    if (args.size() != nu) {
      throw ParseError("marginals need one value per view", number);
    }
    for (auto a : args) {
      prior.marginals.push_back(parse_double(a, number));
    }
  }
  if (in.peek_is("counts")) {
    in.expect("counts");
    std::vector<std::uint64_t> counts;
    for (std::size_t i = 0; i < nu; ++i) {
      const auto row = in.integers(nu);
      counts.insert(counts.end(), row.begin(), row.end());
    }
    prior.counts = CountMatrix::from_row_major(nu, std::move(counts));
  }
  in.finish();
  try {
    prior.validate();
  } catch (const DomainError& e) {
    throw ParseError(e.what(), 0);
  }
  return prior;
}

std::string save_trajectory(const Trajectory& trajectory) {
  std::ostringstream out;
  out << "# trajectory v1\n";
  const RangeScan* first = trajectory.records.empty() ? nullptr : &trajectory.records.front().scan;
  out << "max_range " << format_double(first ? first->max_range : 0.0) << '\n';
  out << "bearings";
  if (first) {
    for (double a : first->angles) {
      out << ' ' << format_double(a);
    }
  }
  out << '\n';
  out << "truncated " << (trajectory.truncated ? 1 : 0) << '\n';
  for (std::size_t k = 0; k < trajectory.records.size(); ++k) {
    const auto& r = trajectory.records[k];
    if (r.scan.angles != first->angles || r.scan.max_range != first->max_range ||
        r.scan.ranges.size() != first->angles.size()) {
      throw DomainError("all scans of a trajectory log must share one beam geometry");
    }
    out << k << ' ' << format_double(r.true_pose.x) << ' ' << format_double(r.true_pose.y) << ' '
        << format_double(r.true_pose.theta) << ' ' << format_double(r.odometry.d_trans) << ' '
        << format_double(r.odometry.d_rot1) << ' ' << format_double(r.odometry.d_rot2);
    for (double range : r.scan.ranges) {
      out << ' ' << format_double(range);
    }
    out << '\n';
  }
  return out.str();
}

Trajectory load_trajectory(std::string_view text) {
  LineReader in(text);
  const std::size_t mr_line = in.line();
  const double max_range = parse_double(in.expect("max_range", 1)[0], mr_line);
  const std::size_t b_line = in.line();
  std::vector<double> bearings;
  for (auto a : in.expect("bearings")) {
    bearings.push_back(parse_double(a, b_line));
  }
  const std::size_t t_line = in.line();
  const auto flag = in.expect("truncated", 1)[0];
  if (flag != "0" && flag != "1") {
    throw ParseError("truncated flag must be 0 or 1", t_line);
  }

  Trajectory traj;
  traj.truncated = flag == "1";
  std::size_t expected_step = 0;
  while (!in.done()) {
    const std::size_t number = in.line();
    const auto row = in.numbers(7 + bearings.size());
    if (row[0] != static_cast<double>(expected_step)) {
      throw ParseError("records must be numbered consecutively from 0", number);
    }
    ++expected_step;
    TrajectoryRecord rec;
    rec.true_pose = {row[1], row[2], row[3]};
    rec.odometry = {row[4], row[5], row[6]};
    rec.scan.angles = bearings;
    rec.scan.max_range = max_range;
    rec.scan.ranges.assign(row.begin() + 7, row.end());
    try {
      rec.scan.validate();
    } catch (const DomainError& e) {
      throw ParseError(e.what(), number);
    }
    traj.records.push_back(std::move(rec));
  }
  return traj;
}

StructurePrior load_prior_file(const std::string& path) { return load_prior(read_file(path)); }
void save_prior_file(const std::string& path, const StructurePrior& prior) {
  write_file(path, save_prior(prior));
}
Trajectory load_trajectory_file(const std::string& path) {
  return load_trajectory(read_file(path));
}
void save_trajectory_file(const std::string& path, const Trajectory& trajectory) {
  write_file(path, save_trajectory(trajectory));
}

std::vector<ManifestEntry> load_manifest(std::string_view text, const std::string& base_dir) {
  namespace fs = std::filesystem;
  const auto resolve = [&](std::string_view p) {
    const fs::path path{std::string(p)};
    if (path.is_absolute() || base_dir.empty()) {
      return path.string();
    }
    return (fs::path(base_dir) / path).lexically_normal().string();
  };

  LineReader in(text);
  std::vector<ManifestEntry> entries;
  while (!in.done()) {
    const std::size_t number = in.line();
    const auto args = in.expect("pair", 7);
    if (args.size() > 8) {
      throw ParseError("too many fields on a pair line", number);
    }
    ManifestEntry e;
    e.partial_map = resolve(args[0]);
    e.trajectory = resolve(args[1]);
    e.environment = std::string(args[2]);
    e.prior = resolve(args[3]);
    e.offset = {parse_double(args[4], number), parse_double(args[5], number),
                parse_double(args[6], number)};
    if (args.size() == 8) {
      e.env_area = parse_double(args[7], number);
      if (!(*e.env_area > 0.0)) {
        throw ParseError("environment area must be positive", number);
      }
    }
    entries.push_back(std::move(e));
  }
  if (entries.empty()) {
    throw ParseError("manifest lists no pairs", 0);
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest_file(const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path().string();
  return load_manifest(read_file(path), dir);
}

std::string save_manifest(const std::vector<ManifestEntry>& entries) {
  std::ostringstream out;
  out << "# partial_map trajectory environment prior dx dy dtheta [environment_area]\n";
  for (const auto& e : entries) {
    out << "pair " << e.partial_map << ' ' << e.trajectory << ' ' << e.environment << ' '
        << e.prior << ' ' << format_double(e.offset.x) << ' ' << format_double(e.offset.y) << ' '
        << format_double(e.offset.theta);
    if (e.env_area) {
      out << ' ' << format_double(*e.env_area);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace revisit
