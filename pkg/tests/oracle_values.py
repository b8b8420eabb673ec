"""Frozen reference values produced by ``tests/oracles/compute_oracles.py`` (mpmath, 30 digits)."""

EX1_PHI = 0.31086100845600191
EX1_W_1 = 2.0046339170235302
EX1_W1_042 = 0.9839907799726745
EX1_B0 = 0.41961167514007823
EX1_KBAR_1 = 0.75263275000614859
EX1_PSI_1_1 = 0.88252414217401694
EX1_V_1_1 = 1.9209604131227144

EX2_PHI = 0.095644479764960457
EX2_Z_1 = 1.0302318370350047
EX2_ZBAR_1 = 1.0127906938472337
EX2_W_1 = 1.3411478730814908

EXP_PHI = 0.19162280580252782
EXP_W_2 = 1.3380000656878253
EXP_Z_2 = 1.4153038107397418

EX3_PHI = 0.21544346900318837
EX3_KBAR_3 = 0.30300454241335245
EX3_KBAR_10 = 0.097019620926045431
EX3_W_2 = 1.8057672819946394
