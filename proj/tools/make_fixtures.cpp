// Writes the bundled MOOT-format fixtures into a directory. The files are
// synthetic stand-ins shaped like the public MOOT tables of the same name
// (row counts, x/y column counts, header conventions); values come from
// seeded closed-form response surfaces, so regeneration is bit-identical.
//
//   make_fixtures data/

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "frugal/random.hpp"

namespace {

namespace fs = std::filesystem;
using frugal::Rng;

std::string num(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  return s;
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

// Storm-like topology tuning: 12 x 14 x 9 full factorial.
void ss_a(const fs::path& dir) {
  Csv csv(dir / "SS-A.csv", {"Spout_wait", "Spliters", "Counters", "Throughput+", "Latency-"});
  Rng rng(101);
  for (int w = 0; w < 12; ++w)
    for (int s = 0; s < 14; ++s)
      for (int c = 0; c < 9; ++c) {
        const double wait = 1 + 10 * w;  // ms
        const double spl = 1 + s;
        const double cnt = 1 + 2 * c;
        const double par = std::log(spl * cnt);
        const double contention = std::pow(std::max(0.0, spl + cnt - 22) / 8, 2);
        double thr = 4000 * (1 - std::exp(-par / 0.9)) / (1 + wait / 600) * (1 - 0.5 * contention);
        if (s < 2 || c < 1) thr *= 0.5;  // starved topologies
        thr *= 1 + 0.03 * rng.normal();
        double lat = 10 + 0.06 * wait + 0.4 * std::abs(spl - 7) + 0.25 * std::abs(cnt - 9) + 25 * contention;
        if ((s * 7 + c * 3 + w) % 29 == 0) lat *= 4;  // occasional pathological configs
        lat *= 1 + 0.04 * rng.normal();
        csv.row({num(wait, 0), num(spl, 0), num(cnt, 0), num(std::max(thr, 1.0), 1), num(std::max(lat, 1.0), 2)});
      }
}

// Cars: cylinders, displacement, horsepower (some unknown), year, origin.
void auto93(const fs::path& dir) {
  Csv csv(dir / "auto93.csv", {"Clndrs", "Volume", "Hp", "Model", "origin", "Lbs-", "Acc+", "Mpg+"});
  Rng rng(93);
  const int cyls[] = {4, 4, 4, 4, 6, 6, 8, 8, 3, 5};
  for (int i = 0; i < 398; ++i) {
    const int cyl = cyls[rng.index(10)];
    const double volume = cyl * (22 + 18 * rng.uniform()) + 10 * rng.normal();
    const double hp = 0.38 * volume + 25 + 12 * rng.normal();
    const int model = 70 + static_cast<int>(rng.index(13));
    const int origin = cyl >= 6 ? 1 : 1 + static_cast<int>(rng.index(3));
    const double lbs = 1400 + 8.5 * volume + 6 * hp + (origin == 1 ? 250 : 0) + 120 * rng.normal();
    const double acc = std::clamp(24 - 0.055 * hp + 0.0008 * lbs + 1.2 * rng.normal(), 8.0, 25.0);
    const double mpg = std::clamp(50 - 0.006 * lbs - 0.03 * hp + 0.45 * (model - 70) + 2 * rng.normal(), 9.0, 47.0);
    const std::string hp_cell = i % 67 == 13 ? "?" : num(std::max(hp, 46.0), 0);
    csv.row({std::to_string(cyl), num(std::max(volume, 68.0), 0), hp_cell, std::to_string(model),
             std::to_string(origin), num(lbs, 0), num(acc, 1), num(mpg, 0)});
  }
}

// COCOMO-style effort data: 15 symbolic rating columns + 7 numeric ones.
void nasa93dem(const fs::path& dir) {
  const std::vector<std::string> sym = {"rely", "data", "cplx", "time", "stor", "virt", "turn", "acap",
                                        "aexp", "pcap", "vexp", "lexp", "modp", "tool", "sced"};
  std::vector<std::string> header = sym;
  for (const char* n : {"Kloc", "Team", "Sites", "Year", "Reuse", "Docu", "Pvol"}) header.push_back(n);
  for (const char* n : {"Effort-", "Defects-", "Months-", "Risk-"}) header.push_back(n);
  Csv csv(dir / "nasa93dem.csv", header);
  Rng rng(9393);
  const char* levels[] = {"vl", "l", "n", "h", "vh", "xh"};
  for (int i = 0; i < 93; ++i) {
    std::vector<std::string> row;
    double em = 1;
    for (std::size_t k = 0; k < sym.size(); ++k) {
      const std::size_t lv = 1 + rng.index(4);  // l..vh mostly
      row.push_back(levels[lv]);
      const double sign = k < 7 ? 1.0 : -1.0;  // product/platform drivers raise effort, people lower it
      em *= 1 + sign * 0.09 * (static_cast<double>(lv) - 2);
    }
    const double kloc = std::exp(1 + 4 * rng.uniform());
    const double team = 2 + static_cast<double>(rng.index(40));
    const double sites = 1 + static_cast<double>(rng.index(6));
    const double year = 1971 + static_cast<double>(rng.index(17));
    const double reuse = 0.7 + 0.6 * rng.uniform();
    const double docu = 0.8 + 0.5 * rng.uniform();
    const double pvol = 0.85 + 0.4 * rng.uniform();
    for (double v : {kloc, team, sites, year}) row.push_back(num(v, v == kloc ? 1 : 0));
    for (double v : {reuse, docu, pvol}) row.push_back(num(v, 2));
    const double effort = 2.94 * std::pow(kloc, 1.1) * em * reuse * docu * (1 + 0.03 * sites) * (1 + 0.1 * rng.normal());
    const double defects = 12 * kloc * em * pvol * (1 + 0.15 * rng.normal());
    const double months = 3.67 * std::pow(std::max(effort, 1.0), 0.32) * (1 + 0.015 * team);
    const double risk = std::max(0.0, 20 * (em - 1) + 2 * sites + 5 * rng.normal());
    row.push_back(num(std::max(effort, 1.0), 1));
    row.push_back(num(std::max(defects, 1.0), 0));
    row.push_back(num(months, 1));
    row.push_back(num(risk, 1));
    csv.row(row);
  }
}

// Agile requirements process simulation knobs.
void pom3a(const fs::path& dir) {
  Csv csv(dir / "pom3a.csv", {"Culture", "Criticality", "CriticalityModifier", "InitialKnown", "InterDependency",
                              "Dynamism", "Size", "Plan", "TeamSize", "Cost-", "Score+", "Idle-"});
  Rng rng(333);
  for (int i = 0; i < 500; ++i) {
    const double culture = 0.1 + 0.8 * rng.uniform();
    const double crit = 0.82 + 0.44 * rng.uniform();
    const double critmod = 2 + 8 * rng.uniform();
    const double known = 0.4 + 0.3 * rng.uniform();
    const double interdep = 1 + 99 * rng.uniform();
    const double dyn = 1 + 49 * rng.uniform();
    const double size = static_cast<double>(rng.index(5));
    const double plan = static_cast<double>(rng.index(6));
    const double team = 1 + 43 * rng.uniform();
    const double cost = 200 + 80 * crit * critmod / 5 + 3 * dyn + 40 * size + 4 * team - 60 * known +
                        8 * std::abs(plan - 2.5) + 15 * rng.normal();
    const double score = std::clamp(0.9 - 0.002 * interdep - 0.004 * dyn + 0.25 * known + 0.1 * culture -
                                        0.02 * std::abs(plan - 3) + 0.03 * rng.normal(),
                                    0.0, 1.0);
    const double idle = std::clamp(0.05 + 0.004 * team + 0.003 * interdep - 0.1 * culture + 0.03 * rng.normal(), 0.0, 1.0);
    csv.row({num(culture, 3), num(crit, 3), num(critmod, 2), num(known, 3), num(interdep, 1), num(dyn, 1),
             num(size, 0), num(plan, 0), num(team, 1), num(cost, 1), num(score, 3), num(idle, 3)});
  }
}

// Six-option configurable system, 4 x 4 x 4 x 5 x 4 x 3 = 3840 configs.
void ss_s(const fs::path& dir) {
  Csv csv(dir / "SS-S.csv", {"Threads", "Buffer", "Batch", "Cache", "Compress", "Replicas", "Runtime-", "Energy-"});
  Rng rng(1919);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 5; ++d)
          for (int e = 0; e < 4; ++e)
            for (int f = 0; f < 3; ++f) {
              const double threads = std::pow(2.0, a), buffer = 64 * std::pow(2.0, b), batch = 10 * (c + 1);
              const double cache = 32 * d, compress = e, replicas = 1 + f;
              double runtime = 100 / (0.6 + 0.4 * threads) + 300 / (buffer / 64 + 1) + std::abs(batch - 25) * 0.8 +
                               12 * std::exp(-cache / 40) * 4 + 6 * compress + 9 * replicas;
              double energy = 20 + 6 * threads + 0.02 * buffer + 0.1 * batch + 0.05 * cache + 4 * (3 - compress) +
                              15 * replicas;
              if (threads >= 8 && buffer <= 64) runtime *= 1.8;
              runtime *= 1 + 0.03 * rng.normal();
              energy *= 1 + 0.03 * rng.normal();
              csv.row({num(threads, 0), num(buffer, 0), num(batch, 0), num(cache, 0), num(compress, 0),
                       num(replicas, 0), num(runtime, 2), num(energy, 2)});
            }
}

// COCOMO-II style simulation: 17 numeric drivers, 5 goals.
void coc1000(const fs::path& dir) {
  std::vector<std::string> header = {"Prec", "Flex", "Resl", "Team", "Pmat", "Rely", "Data", "Cplx", "Ruse",
                                     "Docu", "Time", "Stor", "Pvol", "Acap", "Pcap", "Pcon", "Loc"};
  for (const char* n : {"Effort-", "Months-", "Defects-", "Risks-", "Ploc+"}) header.push_back(n);
  Csv csv(dir / "coc1000.csv", header);
  Rng rng(1000);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> d(16);
    for (auto& v : d) v = 1 + static_cast<double>(rng.index(5));
    const double loc = 2 + 498 * rng.uniform();
    double sf = 0;
    for (int k = 0; k < 5; ++k) sf += d[static_cast<std::size_t>(k)];
    double em = 1;
    for (int k = 5; k < 13; ++k) em *= 1 + 0.08 * (d[static_cast<std::size_t>(k)] - 3);
    for (int k = 13; k < 16; ++k) em *= 1 - 0.1 * (d[static_cast<std::size_t>(k)] - 3);
    const double effort = 2.94 * std::pow(loc, 0.91 + 0.01 * sf) * em * (1 + 0.05 * rng.normal());
    const double months = 3.67 * std::pow(effort, 0.28 + 0.002 * sf);
    const double defects = loc * 3 * em * (6 - d[4]) / 3;
    const double risks = std::max(0.0, 2 * (em - 0.8) * 10 + (d[10] + d[11] - 4) * 1.5 + 2 * rng.normal());
    const double ploc = loc / std::max(effort, 1.0);
    std::vector<std::string> row;
    for (double v : d) row.push_back(num(v, 0));
    row.push_back(num(loc, 1));
    for (double v : {effort, months, defects, risks, ploc}) row.push_back(num(v, 3));
    csv.row(row);
  }
}

// Small smoke-test table with a symbolic column and a missing value.
void toy(const fs::path& dir) {
  Csv csv(dir / "toy.csv", {"Size", "Speed", "mode", "Cost-", "Value+"});
  Rng rng(7);
  const char* modes[] = {"fast", "safe", "eco"};
  for (int i = 0; i < 40; ++i) {
    const double size = 1 + static_cast<double>(rng.index(10));
    const double speed = 10 * rng.uniform();
    const std::size_t m = rng.index(3);
    const double cost = 5 + size * 2 + speed + (m == 0 ? 4 : m == 1 ? 1 : 0) + rng.normal();
    const double value = 10 + 3 * speed - std::abs(size - 5) + (m == 2 ? -3 : 0) + rng.normal();
    csv.row({num(size, 0), i == 17 ? "?" : num(speed, 2), modes[m], num(cost, 2), num(value, 2)});
  }
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? argv[1] : "data";
  fs::create_directories(dir);
  for (auto& make : std::vector<std::function<void(const fs::path&)>>{ss_a, auto93, nasa93dem, pom3a, ss_s, coc1000, toy})
    make(dir);
  std::cout << "wrote fixtures to " << dir.string() << '\n';
}
