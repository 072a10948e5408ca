#include "hnmvts/error.hpp"
#include "hnmvts/experiment.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include <fmt/format.h>

namespace hnmvts {

namespace {

VariantStats stats_of(const std::vector<const ResultRecord*>& rs) {
    VariantStats s;
    s.n = rs.size();
    if (rs.empty()) return s;
    const double n = static_cast<double>(rs.size());
    for (const auto* r : rs) {
        s.mse_mean += r->test_mse / n;
        s.mae_mean += r->test_mae / n;
        s.seconds_mean += r->epoch_seconds_mean / n;
    }
    if (rs.size() > 1) {
        double vm = 0, va = 0;
        for (const auto* r : rs) {
            vm += (r->test_mse - s.mse_mean) * (r->test_mse - s.mse_mean);
            va += (r->test_mae - s.mae_mean) * (r->test_mae - s.mae_mean);
        }
        s.mse_std = std::sqrt(vm / (n - 1));
        s.mae_std = std::sqrt(va / (n - 1));
    }
    return s;
}

} // namespace

std::vector<SummaryCell> summarize(const std::vector<ResultRecord>& records) {
    using Key = std::tuple<std::string, std::string, std::size_t>;
    std::vector<Key> order;
    std::map<Key, std::map<std::uint64_t, const ResultRecord*>> base, hyper;
    for (const auto& r : records) {
        if (r.status != "ok") continue;
        Key key{r.dataset, r.backbone, r.horizon};
        if (!base.contains(key) && !hyper.contains(key)) order.push_back(key);
        (r.variant == to_string(Variant::baseline) ? base : hyper)[key][r.seed] = &r;
    }

    std::vector<SummaryCell> cells;
    for (const auto& key : order) {
        SummaryCell cell;
        std::tie(cell.dataset, cell.backbone, cell.horizon) = key;
        const auto& b = base[key];
        const auto& h = hyper[key];
        std::vector<const ResultRecord*> bs, hs;
        std::vector<double> bm, hm;
        for (const auto& [seed, r] : b) bs.push_back(r);
        for (const auto& [seed, r] : h) hs.push_back(r);
        for (const auto& [seed, r] : h) {
            if (auto it = b.find(seed); it != b.end()) {
                hm.push_back(r->test_mse);
                bm.push_back(it->second->test_mse);
            }
        }
        cell.baseline = stats_of(bs);
        cell.hn_mvts = stats_of(hs);
        cell.complete = !hm.empty() && hm.size() == b.size() && hm.size() == h.size();
        if (!hm.empty()) cell.test = wilcoxon_signed_rank(hm, bm);
        if (cell.baseline.n > 0 && cell.hn_mvts.n > 0 && cell.baseline.mse_mean != 0) {
            cell.relative_change = (cell.hn_mvts.mse_mean - cell.baseline.mse_mean) / cell.baseline.mse_mean;
        }
        if (cell.baseline.seconds_mean > 0) cell.time_ratio = cell.hn_mvts.seconds_mean / cell.baseline.seconds_mean;
        cells.push_back(cell);
    }
    return cells;
}

std::string format_summary(const std::vector<SummaryCell>& cells) {
    std::string out = fmt::format("{:<12} {:<8} {:>4}  {:>19}  {:>19}  {:>8}  {:>8}  {:>3}  {:>6}\n", "dataset", "backbone",
                                  "H", "baseline MSE", "HN-MVTS MSE", "change", "p", "n", "time");
    for (const auto& c : cells) {
        out += fmt::format("{:<12} {:<8} {:>4}  {:>9.6f} ± {:<8.6f}  {:>9.6f} ± {:<8.6f}  {:>+7.2f}%  {:>8.5f}  {:>3}  {:>5.2f}x{}\n",
                           c.dataset, c.backbone, c.horizon, c.baseline.mse_mean, c.baseline.mse_std,
                           c.hn_mvts.mse_mean, c.hn_mvts.mse_std, 100.0 * c.relative_change, c.test.p_value,
                           c.test.used, c.time_ratio, c.complete ? "" : "  (incomplete)");
    }
    return out;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryCell>& cells) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("{}: cannot open for writing", path.string()));
    out << "dataset,backbone,horizon,complete,baseline_n,baseline_mse_mean,baseline_mse_std,baseline_mae_mean,"
           "baseline_mae_std,baseline_epoch_seconds,hn_mvts_n,hn_mvts_mse_mean,hn_mvts_mse_std,hn_mvts_mae_mean,"
           "hn_mvts_mae_std,hn_mvts_epoch_seconds,relative_change,wilcoxon_w_plus,wilcoxon_w_minus,wilcoxon_p,"
           "significant,time_ratio\n";
    for (const auto& c : cells) {
        out << fmt::format("{},{},{},{},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.6g},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.6g},"
                           "{:.9g},{},{},{:.9g},{},{:.6g}\n",
                           c.dataset, c.backbone, c.horizon, c.complete ? 1 : 0, c.baseline.n, c.baseline.mse_mean,
                           c.baseline.mse_std, c.baseline.mae_mean, c.baseline.mae_std, c.baseline.seconds_mean,
                           c.hn_mvts.n, c.hn_mvts.mse_mean, c.hn_mvts.mse_std, c.hn_mvts.mae_mean, c.hn_mvts.mae_std,
                           c.hn_mvts.seconds_mean, c.relative_change, c.test.w_plus, c.test.w_minus, c.test.p_value,
                           c.test.significant ? 1 : 0, c.time_ratio);
    }
}

} // namespace hnmvts
