#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "saca/engine.hpp"
#include "saca/image.hpp"
#include "saca/inference.hpp"

namespace saca {

struct AnalysisOptions
{
  SacaConfig config;
  Correction correction = Correction::Bonferroni;
  double alpha = 0.05;
  Tail tail = Tail::One;
};

struct AnalysisReport
{
  PlaneXd zscores;
  PlaneXd pvalues;
  RegionMask mask;
  SummaryStats summary;
  AnalysisOptions options;
  ResolvedParams params;
  int iterations_run = 0;
  double frozen_fraction_final = 0.0;
  std::map<std::string, double> timing; ///< seconds per stage
};

AnalysisReport analyze(DualChannelImaged const &img, AnalysisOptions const &opts,
                       ProgressCallback const &progress = {});

/// Resolved configuration; feeding it back through options_from_json
/// reproduces the run.
nlohmann::json config_json(AnalysisOptions const &opts, ResolvedParams const &params);
AnalysisOptions options_from_json(nlohmann::json const &j);

nlohmann::json summary_json(AnalysisReport const &report);

/// Diverging palette: blue at z = -8, white at 0, red at +8, linear between,
/// clipped outside.
std::array<std::uint8_t, 3> heat_color(double z) noexcept;

/// Writes zscores.csv, pvalues.csv, mask.png, heatmap.png, overlay.png and
/// summary.json into dir.
void write_report(std::filesystem::path const &dir, AnalysisReport const &report, DualChannelImaged const &img);

void write_heatmap(std::filesystem::path const &path, PlaneXd const &z);
void write_mask(std::filesystem::path const &path, MaskX const &mask);

/// Grayscale merge of both channels with significant pixels painted blue.
void write_overlay(std::filesystem::path const &path, DualChannelImaged const &img, MaskX const &mask);

} // namespace saca
