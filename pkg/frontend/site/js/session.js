// Admin token lives in this module variable for the lifetime of the page.
// Deliberately no localStorage / sessionStorage / cookies: closing the tab
// forgets the token.
let adminToken = null;
export function setToken(token) {
    adminToken = token.trim() === "" ? null : token.trim();
}
export function getToken() {
    return adminToken;
}
export function clearToken() {
    adminToken = null;
}
