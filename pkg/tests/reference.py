"""Published reference values used by the unit and acceptance tests."""

# published central values and uncertainties, E_h a0^6
TABLE_ER = {
    (0, 1): (-1723.072389927, 65.0), (2, 1): (1.903660883, 0.57),
    (0, 2): (0.171750953, 0.099), (2, 2): (0.242892527, 0.14),
    (0, 3): (-0.000943784, 0.00055), (2, 3): (-0.001128037, 0.00066),
    (4, 1): (-0.009080527, 0.0053),
}
TABLE_TM = {
    (0, 1): (-1672.115030649, 54.0), (2, 1): (0.788488761, 1.47),
    (0, 2): (0.001566976, 0.012), (2, 2): (0.002216039, 0.017),
    (0, 3): (-0.000309025, 0.00060), (2, 3): (-0.000369355, 0.00072),
    (4, 1): (-0.002973250, 0.0058),
}
CORR_ER = [[1.00, -0.38, -0.50, 0.32], [-0.38, 1.00, 0.37, -1.00],
           [-0.50, 0.37, 1.00, -0.34], [0.32, -1.00, -0.34, 1.00]]
CORR_TM = [[1.00, -0.03, 0.15, 0.05], [-0.03, 1.00, -0.10, -1.00],
           [0.15, -0.10, 1.00, 0.09], [0.05, -1.00, 0.09, 1.00]]

# published table entries (R in a0, cm^-1)
VSS_NODES = {
    "Er": {8.7: -766.942290212839, 7.6: -302.624146371783, 18.0: -20.0834953954821},
    "Tm": {8.8: -766.073434020327, 6.5: 2452.88195449737, 20.0: -10.664119330474},
}
V2_NODES = {"Er": {8.0: 1.15802330, 9.0: 0.78757466}, "Tm": {8.5: 3.0630180, 9.0: 2.3390504}}
V0_NODES = {"Er": {8.0: -684.70138046, 9.0: -788.86447184}, "Tm": {8.5: -825.64585040, 9.0: -784.32927135}}
