#!/usr/bin/env python3
"""
Performance evaluation scripts for the spin-chain simulator.
Times the chain update, orbit census, sparse evolution and orbit-wise
Hamiltonian verification over growing chain sizes.
"""

import time
import random
import matplotlib.pyplot as plt
import pandas as pd
from typing import List, Dict
import sys
import os

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from data_structures.spin_chain import ChainConfig, brute_force_census, orbit_census, update_index
from data_structures.sparse_state import QState, apply_chain_update
from services.chain_hamiltonian import build_hamiltonian, evolve, verify_bch
from services.hybrid import scan_two_branch

class PerformanceEvaluator:
    """Performance evaluation for the simulator components."""
    
    def __init__(self, seed: int = 7):
        self.results = {}
        self.random = random.Random(seed)
    
    def test_update_performance(self, sizes: List[int], samples: int = 20000) -> Dict:
        """Time the closed-form update on random basis indices."""
        print("Testing Chain Update Performance...")
        
        update_times = []
        for size in sizes:
            indices = [self.random.getrandbits(size) for _ in range(samples)]
            start_time = time.perf_counter()
            for index in indices:
                update_index(index, size)
            elapsed = time.perf_counter() - start_time
            update_times.append(elapsed / samples)
            print(f"    2S={size:2d}: {elapsed / samples * 1e6:.3f} us per update")
        
        return {"sizes": sizes, "update_times": update_times}
    
    def test_census_performance(self, sizes: List[int]) -> Dict:
        """Analytic census against brute-force orbit enumeration."""
        print("Testing Orbit Census Performance...")
        
        analytic_times = []
        brute_times = []
        for size in sizes:
            config = ChainConfig(num_spins=size)
            start_time = time.perf_counter()
            census = orbit_census(config)
            analytic_times.append(time.perf_counter() - start_time)
            
            start_time = time.perf_counter()
            brute = brute_force_census(config)
            brute_times.append(time.perf_counter() - start_time)
            assert brute == census, f"census mismatch at 2S={size}"
            print(f"    2S={size:2d}: analytic {analytic_times[-1]:.6f}s, brute force {brute_times[-1]:.4f}s")
        
        return {"sizes": sizes, "analytic_times": analytic_times, "brute_times": brute_times}
    
    def test_sparse_evolution_performance(self, branch_counts: List[int], size: int = 40,
                                          steps: int = 100) -> Dict:
        """Permutation steps and exact Hamiltonian evolution on sparse superpositions."""
        print("Testing Sparse Evolution Performance...")
        
        config = ChainConfig(num_spins=size)
        h = build_hamiltonian(config)
        step_times = []
        evolve_times = []
        for count in branch_counts:
            indices = {self.random.getrandbits(size) for _ in range(count)}
            state = QState({i: len(indices) ** -0.5 for i in indices}, size)
            
            start_time = time.perf_counter()
            current = state
            for _ in range(steps):
                current = apply_chain_update(current, config)
            step_times.append((time.perf_counter() - start_time) / steps)
            
            start_time = time.perf_counter()
            evolve(h, state, 0.5 * config.timestep)
            evolve_times.append(time.perf_counter() - start_time)
            print(f"    {count:5d} branches: step {step_times[-1]:.6f}s, evolve {evolve_times[-1]:.4f}s")
        
        return {"branch_counts": branch_counts, "step_times": step_times, "evolve_times": evolve_times}
    
    def test_bch_performance(self, sizes: List[int]) -> Dict:
        """Exhaustive orbit-wise verification of exp(-i H T) = U."""
        print("Testing Hamiltonian Verification Performance...")
        
        verify_times = []
        orbit_counts = []
        for size in sizes:
            start_time = time.perf_counter()
            report = verify_bch(ChainConfig(num_spins=size))
            verify_times.append(time.perf_counter() - start_time)
            orbit_counts.append(report.orbit_count)
            print(f"    2S={size:2d}: {report.orbit_count} orbits in {verify_times[-1]:.3f}s "
                  f"({'pass' if report.passed else 'FAIL'})")
        
        return {"sizes": sizes, "verify_times": verify_times, "orbit_counts": orbit_counts}
    
    def test_scan_performance(self) -> Dict:
        """Exhaustive two-branch hybrid scan on the smallest chains."""
        print("Testing Two-Branch Scan Performance...")
        
        sizes = [4, 6]
        scan_times = []
        experiments = []
        for size in sizes:
            sites = (1, 2) if size == 4 else (4, 5)
            start_time = time.perf_counter()
            summary = scan_two_branch(ChainConfig(num_spins=size), sites=sites)
            scan_times.append(time.perf_counter() - start_time)
            experiments.append(summary.experiments)
            print(f"    2S={size}: {summary.experiments} experiments in {scan_times[-1]:.2f}s")
        
        return {"sizes": sizes, "scan_times": scan_times, "experiments": experiments}
    
    def generate_complexity_analysis(self, sizes: List[int], times: List[float], algorithm_name: str) -> str:
        """Estimate how runtime grows with the state-space dimension 2^(2S)."""
        if len(sizes) < 2:
            return "Insufficient data for complexity analysis"
        
        ratios = []
        for i in range(1, len(sizes)):
            if times[i-1] > 0:
                time_ratio = times[i] / times[i-1]
                dimension_ratio = 2 ** (sizes[i] - sizes[i-1])
                ratios.append(time_ratio / dimension_ratio)
        
        if not ratios:
            return "Unable to calculate complexity"
        
        avg_ratio = sum(ratios) / len(ratios)
        
        if avg_ratio < 0.5:
            complexity = "sub-linear in the dimension"
        elif avg_ratio < 2:
            complexity = "linear in the dimension"
        else:
            complexity = "super-linear in the dimension"
        
        return f"{algorithm_name}: {complexity} (avg ratio: {avg_ratio:.2f})"
    
    def create_performance_plots(self):
        """Run every benchmark and plot the timings."""
        print("Generating performance plots...")
        
        update_results = self.test_update_performance([8, 16, 24, 32, 40, 48, 56, 62])
        census_results = self.test_census_performance([4, 6, 8, 10, 12, 14, 16])
        evolution_results = self.test_sparse_evolution_performance([1, 10, 100, 1000])
        bch_results = self.test_bch_performance([4, 6, 8, 10, 12])
        scan_results = self.test_scan_performance()
        
        fig, axes = plt.subplots(2, 2, figsize=(14, 10))
        fig.suptitle('Spin-Chain Simulator Performance', fontsize=16)
        
        axes[0, 0].plot(update_results["sizes"], [t * 1e6 for t in update_results["update_times"]], 'b-o')
        axes[0, 0].set_title('Chain Update (closed form)')
        axes[0, 0].set_xlabel('Number of spins 2S')
        axes[0, 0].set_ylabel('Time per update (us)')
        axes[0, 0].grid(True)
        
        axes[0, 1].semilogy(census_results["sizes"], census_results["analytic_times"], 'g-o', label='Analytic')
        axes[0, 1].semilogy(census_results["sizes"], census_results["brute_times"], 'r-s', label='Brute force')
        axes[0, 1].set_title('Orbit Census')
        axes[0, 1].set_xlabel('Number of spins 2S')
        axes[0, 1].set_ylabel('Time (seconds)')
        axes[0, 1].legend()
        axes[0, 1].grid(True)
        
        axes[1, 0].loglog(evolution_results["branch_counts"], evolution_results["step_times"], 'c-o', label='Update step')
        axes[1, 0].loglog(evolution_results["branch_counts"], evolution_results["evolve_times"], 'm-s', label='exp(-iHt)')
        axes[1, 0].set_title('Sparse Evolution (2S=40)')
        axes[1, 0].set_xlabel('Number of branches')
        axes[1, 0].set_ylabel('Time (seconds)')
        axes[1, 0].legend()
        axes[1, 0].grid(True)
        
        axes[1, 1].semilogy(bch_results["sizes"], bch_results["verify_times"], 'k-o')
        axes[1, 1].set_title('Orbit-wise Hamiltonian Verification')
        axes[1, 1].set_xlabel('Number of spins 2S')
        axes[1, 1].set_ylabel('Time (seconds)')
        axes[1, 1].grid(True)
        
        plt.tight_layout()
        plt.savefig('performance_analysis.png', dpi=300, bbox_inches='tight')
        print("Performance plots saved as 'performance_analysis.png'")
        
        print("\nComplexity Analysis:")
        print("=" * 50)
        print(self.generate_complexity_analysis(census_results["sizes"], census_results["brute_times"], "Brute-force census"))
        print(self.generate_complexity_analysis(bch_results["sizes"], bch_results["verify_times"], "Exhaustive verification"))
        
        return {
            "update": update_results,
            "census": census_results,
            "evolution": evolution_results,
            "bch": bch_results,
            "scan": scan_results
        }
    
    def save_results_csv(self, results: Dict, path: str = 'performance_results.csv'):
        """Flatten all timings into one CSV."""
        rows = []
        for size, t in zip(results["update"]["sizes"], results["update"]["update_times"]):
            rows.append({"benchmark": "update", "parameter": size, "seconds": t})
        for size, a, b in zip(results["census"]["sizes"], results["census"]["analytic_times"],
                              results["census"]["brute_times"]):
            rows.append({"benchmark": "census_analytic", "parameter": size, "seconds": a})
            rows.append({"benchmark": "census_brute_force", "parameter": size, "seconds": b})
        for count, s, e in zip(results["evolution"]["branch_counts"], results["evolution"]["step_times"],
                               results["evolution"]["evolve_times"]):
            rows.append({"benchmark": "sparse_step", "parameter": count, "seconds": s})
            rows.append({"benchmark": "sparse_evolve", "parameter": count, "seconds": e})
        for size, t in zip(results["bch"]["sizes"], results["bch"]["verify_times"]):
            rows.append({"benchmark": "bch_verify", "parameter": size, "seconds": t})
        for size, t in zip(results["scan"]["sizes"], results["scan"]["scan_times"]):
            rows.append({"benchmark": "two_branch_scan", "parameter": size, "seconds": t})
        pd.DataFrame(rows).to_csv(path, index=False, lineterminator="\n")
    
    def generate_performance_report(self, results: Dict) -> str:
        """Generate a text performance report."""
        report = []
        report.append("SPIN-CHAIN SIMULATOR PERFORMANCE REPORT")
        report.append("=" * 50)
        report.append("")
        
        report.append("1. CHAIN UPDATE")
        report.append("-" * 30)
        update = results["update"]
        for i, size in enumerate(update["sizes"]):
            report.append(f"2S: {size:3d} | Update: {update['update_times'][i] * 1e6:8.3f} us")
        report.append("")
        
        report.append("2. ORBIT CENSUS")
        report.append("-" * 30)
        census = results["census"]
        for i, size in enumerate(census["sizes"]):
            report.append(f"2S: {size:3d} | Analytic: {census['analytic_times'][i]:10.6f}s | "
                         f"Brute force: {census['brute_times'][i]:8.4f}s")
        report.append("")
        
        report.append("3. HAMILTONIAN VERIFICATION")
        report.append("-" * 30)
        bch = results["bch"]
        for i, size in enumerate(bch["sizes"]):
            report.append(f"2S: {size:3d} | Orbits: {bch['orbit_counts'][i]:5d} | Time: {bch['verify_times'][i]:8.3f}s")
        report.append("")
        
        report.append("4. TWO-BRANCH SCAN")
        report.append("-" * 30)
        scan = results["scan"]
        for i, size in enumerate(scan["sizes"]):
            report.append(f"2S: {size:3d} | Experiments: {scan['experiments'][i]:7d} | Time: {scan['scan_times'][i]:8.2f}s")
        report.append("")
        
        return "\n".join(report)

def main():
    """Run the performance evaluation."""
    evaluator = PerformanceEvaluator()
    
    print("Starting Spin-Chain Simulator Performance Evaluation")
    print("=" * 50)
    
    results = evaluator.create_performance_plots()
    evaluator.save_results_csv(results)
    
    report = evaluator.generate_performance_report(results)
    
    with open('performance_report.txt', 'w') as f:
        f.write(report)
    
    print("\nPerformance evaluation complete!")
    print("Files generated:")
    print("- performance_analysis.png (charts)")
    print("- performance_results.csv (timings)")
    print("- performance_report.txt (detailed report)")
    
    print("\n" + report)

if __name__ == "__main__":
    main()
