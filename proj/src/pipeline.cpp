#include "claimcheck/pipeline.hpp"

#include "claimcheck/descriptors.hpp"
#include "claimcheck/errors.hpp"
#include "claimcheck/ingest.hpp"
#include "claimcheck/render.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

namespace claimcheck {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path relative_to(const fs::path& base, const std::string& s) {
  const fs::path p(s);
  return p.is_absolute() ? p : base / p;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("output directory not writable: " + dir.string());
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write " + path.string());
  return out;
}

void print_warnings(std::ostream& log, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) log << "warning: " << w << "\n";
}

void print_exclusions(std::ostream& log, const std::vector<ExcludedImage>& excluded) {
  for (const auto& e : excluded) log << "warning: excluded " << e.id << ": " << e.reason << "\n";
}

struct Embedded {
  std::vector<EmbeddingVector> embeddings;
  std::vector<std::string> labels;
  std::vector<ExcludedImage> excluded;
};

/// Data-class failures exclude the image; model failures abort the run.
Embedded embed_faces(const std::vector<AlignedFace>& faces, const Descriptor& descriptor, int workers) {
  std::vector<std::optional<EmbeddingVector>> slots(faces.size());
  std::vector<std::string> failures(faces.size());
  parallel_for(faces.size(), workers, [&](std::size_t i) {
    try {
      slots[i] = descriptor.embed(faces[i]);
    } catch (const Error& e) {
      if (e.error_class() != ErrorClass::data) throw;
      failures[i] = e.what();
    }
  });
  Embedded out;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    if (slots[i]) {
      out.embeddings.push_back(std::move(*slots[i]));
      out.labels.push_back(faces[i].label);
    } else {
      out.excluded.push_back({faces[i].source_id, failures[i]});
    }
  }
  return out;
}

/// Writes the unsorted and per-metric sorted heatmaps plus the distribution
/// plot into `dir`, recording figure paths in `context`.
void render_figures(const AffinityMatrix& matrix, const QualityTable& quality, const VerdictReport& report,
                    const fs::path& dir, ReportContext& context, std::ostream& log) {
  context.figures.clear();
  context.clamped_cells = render_heatmap(matrix, dir / "heatmap_unsorted.png").clamped_cells;
  context.figures["heatmap_unsorted"] = "heatmap_unsorted.png";
  for (Metric m : kAllMetrics) {
    const std::string name(metric_name(m));
    try {
      const AffinityMatrix sorted = sort_by_quality(matrix, quality, m);
      render_heatmap(sorted, dir / ("heatmap_sorted_" + name + ".png"));
      context.figures["heatmap_sorted_" + name] = "heatmap_sorted_" + name + ".png";
    } catch (const UnavailableMetricError& e) {
      log << "warning: no heatmap sorted by " << name << ": " << e.what() << "\n";
    }
  }
  render_distributions(report.case_scores, report.calibration, dir / "distributions.png");
  context.figures["distributions"] = "distributions.png";
}

json statistics_json(const ReportDocument& doc, const AffinityMatrix& matrix, const QualityTable& quality) {
  json j = to_json(doc);
  j["matrix"] = to_json(matrix);
  j["quality"] = to_json(quality);
  return j;
}

template <typename Fn>
int guarded(std::ostream& log, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return exit_code(e.error_class());
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return exit_code(ErrorClass::data);
  }
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(path.string() + ": config must be a JSON object");
  static const std::set<std::string> known{"case_manifest", "reference_manifest", "calibration_cache",
                                           "descriptors",   "preset_dir",         "classifiers",
                                           "quality",       "thresholds",         "histogram_bins",
                                           "output_dir",    "workers",            "assume_aligned"};
  for (const auto& [key, value] : doc.items())
    if (!known.contains(key)) throw ConfigError(path.string() + ": unknown key '" + key + "'");

  const fs::path base = path.parent_path();
  RunConfig cfg;
  cfg.preset_dir = default_preset_dir();
  try {
    if (!doc.contains("case_manifest")) throw ConfigError(path.string() + ": case_manifest is required");
    cfg.case_manifest = relative_to(base, doc["case_manifest"].get<std::string>());
    if (doc.contains("reference_manifest") && !doc["reference_manifest"].is_null())
      cfg.reference_manifest = relative_to(base, doc["reference_manifest"].get<std::string>());
    if (doc.contains("calibration_cache") && !doc["calibration_cache"].is_null())
      cfg.calibration_cache = relative_to(base, doc["calibration_cache"].get<std::string>());
    if (doc.contains("descriptors")) cfg.descriptors = doc["descriptors"].get<std::vector<std::string>>();
    if (cfg.descriptors.empty()) throw ConfigError(path.string() + ": select at least one descriptor");
    for (auto& d : cfg.descriptors)
      if (fs::path(d).extension() == ".json") d = relative_to(base, d).string();
    if (doc.contains("preset_dir")) cfg.preset_dir = relative_to(base, doc["preset_dir"].get<std::string>());
    if (auto it = doc.find("classifiers"); it != doc.end()) {
      for (const auto& [key, value] : it->items()) {
        if (key == "sunglasses") cfg.sunglasses_classifier = relative_to(base, value.get<std::string>());
        else if (key == "gender") cfg.gender_classifier = relative_to(base, value.get<std::string>());
        else throw ConfigError(path.string() + ": unknown classifier role '" + key + "'");
      }
    }
    if (auto it = doc.find("quality"); it != doc.end()) {
      QualityConfig& q = cfg.quality;
      for (const auto& [key, value] : it->items()) {
        if (key == "exposure_low") q.exposure_low = value.get<double>();
        else if (key == "exposure_high") q.exposure_high = value.get<double>();
        else if (key == "contrast_max_std") q.contrast_max_std = value.get<double>();
        else if (key == "sharpness_sigma") q.sharpness_sigma = value.get<double>();
        else if (key == "sharpness_normalizer") q.sharpness_normalizer = value.get<double>();
        else if (key == "eye_patch_width") q.eye_patch_width = value.get<int>();
        else if (key == "eye_patch_height") q.eye_patch_height = value.get<int>();
        else if (key == "sunglasses_dark_threshold") q.sunglasses_dark_threshold = value.get<double>();
        else throw ConfigError(path.string() + ": unknown quality constant '" + key + "'");
      }
      if (!(q.exposure_low < q.exposure_high) || !(q.contrast_max_std > 0) || !(q.sharpness_sigma > 0) ||
          !(q.sharpness_normalizer > 0) || q.eye_patch_width <= 0 || q.eye_patch_height <= 0)
        throw ConfigError(path.string() + ": invalid quality constants");
    }
    if (auto it = doc.find("thresholds"); it != doc.end()) {
      cfg.thresholds.tau_same = it->value("tau_same", cfg.thresholds.tau_same);
      cfg.thresholds.tau_diff = it->value("tau_diff", cfg.thresholds.tau_diff);
      if (cfg.thresholds.tau_same < 0 || cfg.thresholds.tau_same > 1 || cfg.thresholds.tau_diff < 0 ||
          cfg.thresholds.tau_diff > 1)
        throw ConfigError(path.string() + ": thresholds must lie in [0, 1]");
    }
    cfg.histogram.bins = doc.value("histogram_bins", cfg.histogram.bins);
    if (cfg.histogram.bins <= 0) throw ConfigError(path.string() + ": histogram_bins must be positive");
    if (doc.contains("output_dir")) cfg.output_dir = relative_to(base, doc["output_dir"].get<std::string>());
    cfg.workers = doc.value("workers", cfg.workers);
    if (cfg.workers < 1) throw ConfigError(path.string() + ": workers must be at least 1");
    cfg.assume_aligned = doc.value("assume_aligned", cfg.assume_aligned);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return cfg;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < std::min(threads, n); ++t) pool.emplace_back(work);
    work();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

FaceSet prepare_faces(const Manifest& manifest, bool assume_aligned_mode, int workers) {
  const std::size_t n = manifest.entries.size();
  std::vector<std::optional<AlignedFace>> slots(n);
  std::vector<std::string> failures(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const ManifestEntry& entry = manifest.entries[i];
    try {
      const ImageSample sample = decode_image(entry.image_path, entry.label, entry.landmarks, entry.id);
      slots[i] = (assume_aligned_mode && !sample.landmarks) ? assume_aligned(sample) : align_face(sample);
    } catch (const Error& e) {
      if (e.error_class() != ErrorClass::data) throw;
      failures[i] = e.what();
    }
  });
  FaceSet set;
  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i]) set.faces.push_back(std::move(*slots[i]));
    else set.excluded.push_back({manifest.entries[i].id, failures[i]});
  }
  return set;
}

LoadedClassifiers load_classifiers(const std::optional<fs::path>& sunglasses, const std::optional<fs::path>& gender) {
  LoadedClassifiers out;
  if (sunglasses) out.sunglasses = AuxClassifier::load(*sunglasses);
  if (gender) out.gender = AuxClassifier::load(*gender);
  return out;
}

QualityTable score_faces(const std::vector<AlignedFace>& faces, const QualityClassifiers& classifiers,
                         const QualityConfig& cfg, int workers, std::vector<std::string>* warnings) {
  std::vector<QualityScores> scores(faces.size());
  std::vector<std::vector<std::string>> notes(faces.size());
  parallel_for(faces.size(), workers,
               [&](std::size_t i) { scores[i] = score_all(faces[i], classifiers, cfg, &notes[i]); });
  QualityTable table;
  for (std::size_t i = 0; i < faces.size(); ++i) {
    table[faces[i].source_id] = scores[i];
    if (warnings != nullptr) warnings->insert(warnings->end(), notes[i].begin(), notes[i].end());
  }
  return table;
}

void write_quality_csv(const std::vector<AlignedFace>& faces, const QualityTable& quality, const fs::path& path) {
  std::ofstream out = open_output(path);
  out << "id,label";
  for (Metric m : kAllMetrics) out << "," << metric_name(m);
  out << "\n";
  for (const auto& f : faces) {
    out << csv_field(f.source_id) << "," << csv_field(f.label);
    const QualityScores& s = quality.at(f.source_id);
    for (Metric m : kAllMetrics) out << "," << (s[m] ? fixed(*s[m], 6) : std::string("NA"));
    out << "\n";
  }
  if (!out) throw IOError("failed writing " + path.string());
}

void write_scores_csv(const AffinityMatrix& matrix, const fs::path& path) {
  std::ofstream out = open_output(path);
  out << "source_id_a,source_id_b,label_a,label_b,similarity\n";
  for (Eigen::Index i = 0; i < matrix.size(); ++i)
    for (Eigen::Index j = i + 1; j < matrix.size(); ++j) {
      const auto a = static_cast<std::size_t>(i);
      const auto b = static_cast<std::size_t>(j);
      out << csv_field(matrix.ids[a]) << "," << csv_field(matrix.ids[b]) << "," << csv_field(matrix.labels[a]) << ","
          << csv_field(matrix.labels[b]) << "," << fixed(matrix.values(i, j), 9) << "\n";
    }
  if (!out) throw IOError("failed writing " + path.string());
}

json to_json(const CalibrationCache& cache) {
  return {{"schema_version", kReportSchemaVersion},
          {"descriptor", cache.descriptor},
          {"embedding_dim", cache.embedding_dim},
          {"identities", cache.identities},
          {"images", cache.images},
          {"distributions", to_json(cache.distributions)}};
}

CalibrationCache calibration_cache_from_json(const json& j) {
  try {
    CalibrationCache c;
    if (j.at("schema_version").get<int>() != kReportSchemaVersion)
      throw ParseError("unsupported calibration cache version");
    c.descriptor = j.at("descriptor").get<std::string>();
    c.embedding_dim = j.at("embedding_dim").get<int>();
    c.identities = j.at("identities").get<int>();
    c.images = j.at("images").get<int>();
    c.distributions = distributions_from_json(j.at("distributions"));
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("calibration cache: ") + e.what());
  }
}

int cmd_analyze(const RunConfig& config, std::ostream& log) {
  return guarded(log, [&] {
    const Manifest manifest = load_manifest(config.case_manifest, ManifestKind::case_set);
    ensure_directory(config.output_dir);

    std::optional<CalibrationCache> cache;
    if (config.calibration_cache) cache = calibration_cache_from_json(read_json_file(*config.calibration_cache));
    std::optional<fs::path> reference_path = config.reference_manifest;
    if (!reference_path) reference_path = manifest.reference;

    std::vector<std::unique_ptr<Descriptor>> descriptors;
    for (const auto& name : config.descriptors)
      descriptors.push_back(load_descriptor(find_descriptor_spec(name, config.preset_dir)));
    const LoadedClassifiers classifiers = load_classifiers(config.sunglasses_classifier, config.gender_classifier);

    FaceSet case_faces = prepare_faces(manifest, config.assume_aligned, config.workers);
    print_exclusions(log, case_faces.excluded);
    std::optional<FaceSet> reference_faces;
    if (reference_path) {
      const bool cache_covers_all = cache && std::all_of(descriptors.begin(), descriptors.end(), [&](const auto& d) {
                                      return d->name() == cache->descriptor;
                                    });
      if (!cache_covers_all) {
        reference_faces = prepare_faces(load_manifest(*reference_path, ManifestKind::reference), config.assume_aligned,
                                        config.workers);
        print_exclusions(log, reference_faces->excluded);
      }
    }

    std::vector<std::string> warnings;
    const QualityTable quality =
        score_faces(case_faces.faces, classifiers.view(), config.quality, config.workers, &warnings);
    print_warnings(log, warnings);
    write_quality_csv(case_faces.faces, quality, config.output_dir / "quality.csv");

    json index = {{"case_name", manifest.case_name}, {"descriptors", json::array()}};
    std::string index_md = "# " + manifest.case_name + "\n\n| descriptor | verdict | report |\n|---|---|---|\n";
    for (const auto& descriptor : descriptors) {
      const fs::path dir = config.output_dir / descriptor->name();
      ensure_directory(dir);

      Embedded embedded = embed_faces(case_faces.faces, *descriptor, config.workers);
      print_exclusions(log, embedded.excluded);
      const AffinityMatrix matrix = all_vs_all(embedded.embeddings, embedded.labels, config.workers);
      const ScoreDistributions case_scores = partition_scores(matrix, config.histogram);

      std::optional<ScoreDistributions> calibration;
      if (cache && cache->descriptor == descriptor->name()) {
        calibration = cache->distributions;
      } else if (reference_faces) {
        Embedded ref = embed_faces(reference_faces->faces, *descriptor, config.workers);
        print_exclusions(log, ref.excluded);
        calibration = calibration_distributions(ref.embeddings, ref.labels, config.histogram);
      } else {
        log << "warning: no calibration population for " << descriptor->name() << "; verdict will be inconclusive\n";
      }

      ReportDocument doc;
      doc.report = verdict(case_scores, calibration, confound_table(matrix, quality), config.thresholds,
                           descriptor->name());
      doc.context.case_name = manifest.case_name;
      doc.context.excluded = case_faces.excluded;
      doc.context.excluded.insert(doc.context.excluded.end(), embedded.excluded.begin(), embedded.excluded.end());

      write_scores_csv(matrix, dir / "scores.csv");
      render_figures(matrix, quality, doc.report, dir, doc.context, log);
      write_json_file(statistics_json(doc, matrix, quality), dir / "statistics.json");
      write_report(doc, dir);

      const std::string verdict_text(verdict_name(doc.report.verdict));
      log << descriptor->name() << ": " << verdict_text << "\n";
      index["descriptors"].push_back(
          {{"descriptor", descriptor->name()}, {"verdict", verdict_text}, {"report", descriptor->name() + "/report.json"}});
      index_md += "| " + descriptor->name() + " | " + verdict_text + " | [" + descriptor->name() + "/report.md](" +
                  descriptor->name() + "/report.md) |\n";
    }
    write_json_file(index, config.output_dir / "index.json");
    std::ofstream md = open_output(config.output_dir / "index.md");
    md << index_md;
    return 0;
  });
}

int cmd_quality(const QualityOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    const Manifest manifest = load_manifest(options.manifest, ManifestKind::reference);
    const LoadedClassifiers classifiers = load_classifiers(options.sunglasses_classifier, options.gender_classifier);
    const FaceSet set = prepare_faces(manifest, options.assume_aligned, options.workers);
    print_exclusions(log, set.excluded);
    if (set.faces.empty()) throw ValidationError("no usable images in " + options.manifest.string());
    std::vector<std::string> warnings;
    const QualityTable quality = score_faces(set.faces, classifiers.view(), {}, options.workers, &warnings);
    print_warnings(log, warnings);
    if (options.out.has_parent_path()) ensure_directory(options.out.parent_path());
    write_quality_csv(set.faces, quality, options.out);
    return 0;
  });
}

int cmd_calibrate(const CalibrateOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    const Manifest manifest = load_manifest(options.manifest, ManifestKind::reference);
    const fs::path preset_dir = options.preset_dir.empty() ? default_preset_dir() : options.preset_dir;
    const auto descriptor = load_descriptor(find_descriptor_spec(options.descriptor, preset_dir));
    const FaceSet set = prepare_faces(manifest, options.assume_aligned, options.workers);
    print_exclusions(log, set.excluded);
    const Embedded embedded = embed_faces(set.faces, *descriptor, options.workers);
    print_exclusions(log, embedded.excluded);

    CalibrationCache cache;
    cache.descriptor = descriptor->name();
    cache.embedding_dim = descriptor->embedding_dim();
    cache.distributions = calibration_distributions(embedded.embeddings, embedded.labels, options.histogram);
    cache.images = static_cast<int>(embedded.embeddings.size());
    cache.identities = static_cast<int>(std::set<std::string>(embedded.labels.begin(), embedded.labels.end()).size());
    if (options.out.has_parent_path()) ensure_directory(options.out.parent_path());
    write_json_file(to_json(cache), options.out);
    log << "calibration: " << cache.distributions.genuine.size() << " genuine, "
        << cache.distributions.impostor.size() << " impostor scores\n";
    return 0;
  });
}

int cmd_render(const fs::path& statistics, const fs::path& out_dir, std::ostream& log) {
  return guarded(log, [&] {
    const json j = read_json_file(statistics);
    ReportDocument doc = report_from_json(j);
    if (!j.contains("matrix") || !j.contains("quality")) throw ParseError(statistics.string() + " lacks matrix/quality");
    const AffinityMatrix matrix = affinity_from_json(j["matrix"]);
    const QualityTable quality = quality_table_from_json(j["quality"]);
    ensure_directory(out_dir);
    render_figures(matrix, quality, doc.report, out_dir, doc.context, log);
    write_report(doc, out_dir);
    return 0;
  });
}

}  // namespace claimcheck
