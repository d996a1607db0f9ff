"""Joint brute-force optimal sums of costs for ``strategies.seeded_instance(seed)``.

Regenerate with ``oracles.joint_optimal_soc``; None marks an unsolvable instance.
"""

JOINT_OPTIMUM = {
    0: 17, 1: 5, 2: 2, 3: 2, 4: 10, 5: 10, 6: 5, 7: 7,
    8: 2, 9: 14, 10: 5, 13: 23, 14: 8, 15: 2, 16: 6, 17: 14,
    18: 1, 19: 10, 20: 6, 21: 5, 22: 3, 24: 3, 25: 1, 26: 6,
    28: 23, 29: 1, 31: 2, 32: 3, 33: 22, 34: 1, 35: 1, 36: 3,
    38: 10, 39: 1, 40: 6, 41: 9, 42: 4, 43: 12, 44: 3, 45: 12,
    46: 6, 48: 2, 49: 2, 50: 19, 51: 7, 52: 4, 53: 7, 54: 1,
    55: 2, 56: 2, 57: 4, 58: None, 61: 3, 62: 8, 63: 2, 64: 13,
    66: 11, 67: 10, 68: 3, 69: 3, 70: 6, 71: 10, 72: 9, 73: 1,
    74: 9, 75: 5, 76: 17, 77: 14, 78: 5, 80: 4, 82: 18, 83: 9,
    84: 9, 85: 2, 86: 16, 87: 10, 88: 3, 89: 7, 90: 9, 91: 4,
    92: 1, 93: 16, 94: 1, 95: 5, 96: 10, 97: 1, 99: 4, 100: 5,
    101: 6, 102: 3, 103: 1, 104: 8, 105: 6, 106: 4, 107: 2, 108: 3,
    109: 11, 110: 3, 111: 5, 113: 1, 114: 2, 115: 3, 117: 6, 118: 2,
    119: 2, 120: 7, 121: 3, 122: 8, 123: 2, 124: 6, 125: 10, 127: 1,
    128: 12, 129: 5, 130: 1, 131: 7, 132: 9, 133: 14, 134: 7, 135: 14,
    136: 8, 137: 10, 138: 2, 140: 5, 141: 2, 143: 5, 144: 2, 145: 4,
    146: 5, 147: 5, 148: 2, 150: 3, 151: 1, 152: 8, 153: 11, 154: 1,
    157: 1, 158: 4, 159: 10, 160: 7, 161: 7, 163: 12, 165: 6, 166: 2,
    167: 13, 168: 2, 169: 4, 170: 13, 171: 2, 172: 2, 173: 8, 174: 3,
    175: 20, 176: 4, 177: 1, 178: 3, 179: 1, 180: 1, 181: 9, 182: 3,
    183: 9, 186: 6, 187: 2, 188: 10, 189: 1, 190: 7, 191: 14, 192: 2,
    193: 2, 194: 19, 196: 7, 197: 7, 198: 7, 199: 1, 201: 5, 202: 3,
    203: 4, 204: 2, 205: 5, 206: 14, 207: 4, 208: 4, 210: 2, 213: 1,
    215: 7, 216: 2, 217: 4, 218: 1, 219: 1, 220: 8, 221: 4, 222: 3,
    223: 1, 224: 35, 225: 17, 226: 5, 227: 18, 228: 2, 229: 3, 230: 5,
}
