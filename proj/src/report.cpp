#include "secagg/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "secagg/flsim/train.hpp"
#include "secagg/protocol.hpp"
#include "secagg/ttp.hpp"

namespace secagg {

namespace {

double fit_slope(const std::vector<int>& xs, const std::vector<std::uint64_t>& ys) {
    const std::size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(static_cast<double>(xs[i]));
        const double y = std::log(static_cast<double>(ys[i]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

} // namespace

CommReport comm_report(const ExperimentConfig& base, const std::vector<int>& sweep_n, int d) {
    CommReport rep;
    rep.sweep_n = sweep_n;
    int max_n = 0;
    for (int n : sweep_n) max_n = std::max(max_n, n);
    const int qc = base.coeff_scale > 0 ? base.coeff_scale : base.q;
    auto shared_mod =
        std::make_shared<const Modulus>(min_modulus(max_n, d, 3, base.q, qc));

    for (int n : sweep_n) {
        ProtocolDims dims;
        dims.n = n;
        dims.t = std::min(base.t, n - 1);
        dims.d = d;
        dims.k = 3;
        dims.q = base.q;
        dims.coeff_scale = qc;
        dims.iterations = 1;
        ProtocolParams params;
        params.dims = dims;
        params.h = default_h(qc);
        params.eta = base.eta;
        params.modulus = shared_mod;
        {
            const std::int64_t den = 1000000000;
            std::int64_t num = static_cast<std::int64_t>(std::llround(base.epsilon * 1e9));
            std::int64_t g = std::gcd(num, den);
            params.eps_num = num / g;
            params.eps_den = den / g;
        }

        rng::Stream master(base.seed ^ static_cast<std::uint64_t>(n));
        Ttp ttp(dims, master.fork({1}));
        TtpOutput out = std::move(ttp).initialize(false, shared_mod);
        std::vector<ClientState> clients;
        for (int i = 0; i < n; ++i)
            clients.emplace_back(i, std::move(out.bundles[static_cast<std::size_t>(i)]),
                                 master.fork({2, static_cast<std::uint64_t>(i)}));
        FederatorState fed(params, std::move(out.keys), RealVec::Zero(d), master.fork({4}));

        RoundInputs in;
        in.g = 0;
        rng::Stream updates_rs = master.fork({3});
        auto random_unit = [&](rng::Stream& rs) {
            RealVec v(d);
            for (int c = 0; c < d; ++c) v[c] = 2.0 * rs.next_unit() - 1.0;
            return RealVec(v / v.norm());
        };
        in.root_update = random_unit(updates_rs);
        for (int i = 0; i < n; ++i) in.client_updates.push_back(random_unit(updates_rs));

        RoundOutput ro = run_iteration(fed, clients, in);
        if (ro.aborted) throw std::runtime_error("comm_report round aborted: " + ro.abort_reason);
        std::uint64_t client_sum = 0;
        for (int i = 0; i < n; ++i) client_sum += ro.transcript.client_bytes(i);
        rep.client_bytes.push_back(client_sum / static_cast<std::uint64_t>(n));
        rep.federator_bytes.push_back(ro.transcript.federator_bytes());
    }
    rep.client_slope = fit_slope(rep.sweep_n, rep.client_bytes);
    rep.federator_slope = fit_slope(rep.sweep_n, rep.federator_bytes);
    return rep;
}

void write_comm_report_csv(const CommReport& r, const std::string& path) {
    std::ofstream out(path);
    out << "n,client_bytes,federator_bytes\n";
    for (std::size_t i = 0; i < r.sweep_n.size(); ++i)
        out << r.sweep_n[i] << "," << r.client_bytes[i] << "," << r.federator_bytes[i] << "\n";
    out << "# client_slope=" << r.client_slope << " federator_slope=" << r.federator_slope << "\n";
}

std::vector<CompareCell> compare_runs(
    const std::vector<std::pair<std::string, ExperimentConfig>>& scenarios,
    const std::vector<std::string>& aggregators, int repeats) {
    std::vector<CompareCell> cells;
    for (const auto& [name, base] : scenarios) {
        for (const std::string& agg : aggregators) {
            std::vector<double> accs, asrs;
            for (int r = 0; r < repeats; ++r) {
                ExperimentConfig cfg = base;
                cfg.aggregator = agg;
                cfg.seed = base.seed + static_cast<std::uint64_t>(r);
                cfg.out_dir.clear();
                flsim::TrainingResult res = flsim::run_training(cfg);
                accs.push_back(res.final_accuracy);
                asrs.push_back(res.final_asr);
            }
            auto mean_std = [](const std::vector<double>& xs) {
                double m = 0;
                for (double x : xs) m += x;
                m /= static_cast<double>(xs.size());
                double v = 0;
                for (double x : xs) v += (x - m) * (x - m);
                v = xs.size() > 1 ? v / static_cast<double>(xs.size() - 1) : 0.0;
                return std::pair<double, double>{m, std::sqrt(v)};
            };
            CompareCell cell;
            cell.scenario = name;
            cell.aggregator = agg;
            std::tie(cell.acc_mean, cell.acc_std) = mean_std(accs);
            std::tie(cell.asr_mean, cell.asr_std) = mean_std(asrs);
            cells.push_back(cell);
        }
    }
    return cells;
}

void write_compare_csv(const std::vector<CompareCell>& cells, const std::string& path) {
    std::ofstream out(path);
    out << "scenario,aggregator,acc_mean,acc_std,asr_mean,asr_std\n";
    for (const CompareCell& c : cells)
        out << c.scenario << "," << c.aggregator << "," << c.acc_mean << "," << c.acc_std << ","
            << c.asr_mean << "," << c.asr_std << "\n";
}

std::string format_compare_table(const std::vector<CompareCell>& cells) {
    std::map<std::string, std::map<std::string, const CompareCell*>> rows;
    std::vector<std::string> row_order, col_order;
    for (const CompareCell& c : cells) {
        if (!rows.count(c.scenario)) row_order.push_back(c.scenario);
        if (rows[c.scenario].empty() || true) {
            if (std::find(col_order.begin(), col_order.end(), c.aggregator) == col_order.end())
                col_order.push_back(c.aggregator);
        }
        rows[c.scenario][c.aggregator] = &c;
    }
    std::ostringstream os;
    os << std::left << std::setw(22) << "attack \\ aggregator";
    for (const auto& col : col_order) os << std::setw(24) << col;
    os << "\n";
    for (const auto& row : row_order) {
        os << std::left << std::setw(22) << row;
        for (const auto& col : col_order) {
            const CompareCell* c = rows[row].count(col) ? rows[row][col] : nullptr;
            std::ostringstream cell;
            if (c) {
                cell << std::fixed << std::setprecision(3) << c->acc_mean << "+-" << c->acc_std;
                if (c->asr_mean > 0.0) cell << " /ASR " << std::setprecision(2) << c->asr_mean;
            } else {
                cell << "-";
            }
            os << std::setw(24) << cell.str();
        }
        os << "\n";
    }
    return os.str();
}

} // namespace secagg
