"""Frozen reference values for the verification suites.

The odd-dimension kernel table below was produced offline by applying the
ladder operator to the base Bessel profile with nested high-precision
numerical differentiation (40 significant digits), entirely independent of
the closed term algebra it checks.
"""

# {(N, s): [(rho, kernel value), ...]}  -- 13 log-spaced points in [0.1, 10]
ODD_KERNEL_FD_ORACLE = {
    (3, 0.25): [
        (0.10000000000000001, 149.84670016571803),
        (0.14677992676220694, 38.893485434775386),
        (0.21544346900318834, 10.031954586185439),
        (0.31622776601683794, 2.5541109190597444),
        (0.46415888336127786, 0.6332055386094213),
        (0.68129206905796114, 0.14886498973770843),
        (1.0, 0.031574276728544515),
        (1.467799267622069, 0.005525702838798505),
        (2.1544346900318834, 0.00068721095574990202),
        (3.1622776601683795, 4.8309377577632722e-05),
        (4.6415888336127775, 1.3859893552048657e-06),
        (6.8129206905796114, 1.0280776255326095e-08),
        (10.0, 1.0234140414368664e-11),
    ],
    (3, 0.5): [
        (0.10000000000000001, 1009.0163569684306),
        (0.14677992676220694, 216.35411331093653),
        (0.21544346900318834, 46.140907958571994),
        (0.31622776601683794, 9.7287728850745161),
        (0.46415888336127786, 2.0032243787416237),
        (0.68129206905796114, 0.39299478900649853),
        (1.0, 0.070043581187736376),
        (1.467799267622069, 0.010396431265335494),
        (2.1544346900318834, 0.0011086125520655911),
        (3.1622776601683795, 6.7586483898523857e-05),
        (4.6415888336127775, 1.6996958280189082e-06),
        (6.8129206905796114, 1.1153382483927701e-08),
        (10.0, 9.8944612534183345e-12),
    ],
    (3, 0.75): [
        (0.10000000000000001, 3750.9549489228061),
        (0.14677992676220694, 664.22131283844556),
        (0.21544346900318834, 117.05541648912042),
        (0.31622776601683794, 20.418346580551809),
        (0.46415888336127786, 3.4856456261725342),
        (0.68129206905796114, 0.56906048141333454),
        (1.0, 0.084906415340583491),
        (1.467799267622069, 0.010639475435924396),
        (2.1544346900318834, 0.0009679708323899576),
        (3.1622776601683795, 5.0936818905611536e-05),
        (4.6415888336127775, 1.1182965807592569e-06),
        (6.8129206905796114, 6.4706758691294836e-09),
        (10.0, 5.1030493247104938e-12),
    ],
    (5, 0.25): [
        (0.10000000000000001, 8320.8925624257045),
        (0.14677992676220694, 998.77003807576216),
        (0.21544346900318834, 118.61685493099685),
        (0.31622776601683794, 13.773081639669295),
        (0.46415888336127786, 1.5253550035434222),
        (0.68129206905796114, 0.153265672867512),
        (1.0, 0.012676542158043667),
        (1.467799267622069, 0.00072140122070664327),
        (2.1544346900318834, 2.0806744217044568e-05),
        (3.1622776601683795, 1.8991631277215533e-07),
        (4.6415888336127775, 2.826147263565082e-10),
        (6.8129206905796114, 2.7418328054868592e-14),
        (10.0, 4.6848362260217994e-20),
    ],
    (5, 0.5): [
        (0.10000000000000001, 64021.640337996418),
        (0.14677992676220694, 6347.1603935436706),
        (0.21544346900318834, 623.06903322819778),
        (0.31622776601683794, 59.887521349072358),
        (0.46415888336127786, 5.505660970917754),
        (0.68129206905796114, 0.46148712790042917),
        (1.0, 0.032090607959237967),
        (1.467799267622069, 0.0015520310617173785),
        (2.1544346900318834, 3.853364789034091e-05),
        (3.1622776601683795, 3.0672182630090707e-07),
        (4.6415888336127775, 4.0255810524412063e-10),
        (6.8129206905796114, 3.4748645525475005e-14),
        (10.0, 5.3165729515799564e-20),
    ],
    (5, 0.75): [
        (0.10000000000000001, 267738.22461084661),
        (0.14677992676220694, 21920.860066205427),
        (0.21544346900318834, 1778.12596479431),
        (0.31622776601683794, 141.39339350517443),
        (0.46415888336127786, 10.77907546222934),
        (0.68129206905796114, 0.75241542261844552),
        (1.0, 0.043878249184653773),
        (1.467799267622069, 0.0017978753349348917),
        (2.1544346900318834, 3.8297206600337325e-05),
        (3.1622776601683795, 2.6502817680510507e-07),
        (4.6415888336127775, 3.0601588962396042e-10),
        (6.8129206905796114, 2.3458383086489892e-14),
        (10.0, 3.2095364353171872e-20),
    ],
}
